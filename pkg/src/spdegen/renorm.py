"""Renormalized generator for the stochastic quantization equation.

The singular cubic dynamics is produced through the decomposition
u = X + v: X is the stochastic convolution (heat flow of the initial
state plus the noise convolved with the heat kernel) and v solves the
shift equation driven by Wick powers of X,

    d v = Lap v dt - (v^3 + 3 v^2 X + 3 v X2 + X3) dt,   v(0) = 0,

with X2 = X^2 - a and X3 = X^3 - 3 a X.  The counterterm a(t, x) is the
variance of the zero-mean driven part of X; the deterministic flow of u0
shifts the mean only, so Wick centering stays exact and testable.

X is advanced mode by mode with the exact Ornstein-Uhlenbeck update: for
basis mode phi_q with Laplacian rate lam_q = (j pi / Lx)^2 + (k pi / Ly)^2,

    c_q(t + dt) = e^{-lam_q dt} c_q(t) + sigma s_q dB_q,
    s_q = sqrt((1 - e^{-2 lam_q dt}) / (2 lam_q dt)),

so Var c_q(t_n) matches the continuum convolution variance exactly at
every step.  The Brownian mode increments dB_q come from the same
generator state as the grid noise path with the same seed, which couples
renormalized and explicit solves sample by sample.

v uses the same semi-implicit scheme family as the reaction-diffusion
solver: implicit finite-difference Laplacian, explicit cubic source.
No truncation limit is taken; the degree J is a dataset parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DivergenceError, InvalidArgumentError
from .noise import (
    BasisSpec,
    NoisePath,
    brownian_mode_increments,
    eigenvalues,
    mode_indices,
    _scatter_order_2d,
    _sine_factor,
)
from .solvers import EquationConfig, Trajectory, _check_initial, _check_noise, _check_stride, _fd_symbol_2d

DEFAULT_SHIFT_BOUND = 1e6


@dataclass
class RenormBundle:
    """All intermediate fields of one renormalized solve.

    a_eps is the counterterm sampled at the saved times, stored as a
    spatial field [n_saved, nx, ny]; X2 and X3 are the Wick powers.
    """

    X: Trajectory
    a_eps: np.ndarray
    X2: Trajectory
    X3: Trajectory
    J: int
    v: Trajectory
    u: Trajectory

    def solution(self) -> Trajectory:
        return self.u


def ou_rates(basis: BasisSpec) -> np.ndarray:
    """Laplacian eigenvalue lam_q of each product-sine mode."""
    if basis.kind != "sine2d":
        raise InvalidArgumentError(
            f"renormalization needs the sine2d basis, got {basis.kind!r}"
        )
    jj, kk = mode_indices(basis)
    lx, ly = basis.lengths
    return (jj * np.pi / lx) ** 2 + (kk * np.pi / ly) ** 2


def _require_phi42(cfg: EquationConfig) -> None:
    if cfg.equation != "phi42":
        raise InvalidArgumentError(f"config is for {cfg.equation!r}")


def _require_matching_basis(cfg: EquationConfig, noise: NoisePath | None) -> None:
    if noise is not None and noise.basis != cfg.basis:
        raise InvalidArgumentError(
            f"noise basis {noise.basis} does not match config basis {cfg.basis}"
        )


@lru_cache(maxsize=8)
def _squared_sine_factors(degree: int, lengths: tuple[float, float], shape: tuple[int, int]):
    fx = _sine_factor(degree, lengths[0], shape[0])
    fy = _sine_factor(degree, lengths[1], shape[1])
    return fx**2, fy**2


@lru_cache(maxsize=8)
def _counterterm_cached(
    degree: int,
    lengths: tuple[float, float],
    shape: tuple[int, int],
    sigma: float,
    times: tuple[float, ...],
) -> np.ndarray:
    basis = BasisSpec("sine2d", degree, lengths)
    lam = ou_rates(basis)
    t = np.asarray(times)
    # per-mode integrated variance (1 - e^{-2 lam t}) / (2 lam), zero at t = 0
    weights = sigma**2 * (1.0 - np.exp(-2.0 * np.outer(t, lam))) / (2.0 * lam)[None, :]
    j_pos, k_pos = _scatter_order_2d("sine2d", degree)
    grid_w = np.zeros((len(t), degree, degree))
    grid_w[:, j_pos, k_pos] = weights
    fx2, fy2 = _squared_sine_factors(degree, lengths, shape)
    field = np.einsum("sjk,jx,ky->sxy", grid_w, fx2, fy2, optimize=True)
    field.flags.writeable = False
    return field


def renorm_constant(degree: int, times, cfg: EquationConfig) -> np.ndarray:
    """Counterterm field a(t, x) = sigma^2 sum_q phi_q(x)^2 (1-e^{-2 lam_q t})/(2 lam_q).

    times may be a scalar or 1-d array of nonnegative times; the result has
    shape [len(times), nx, ny] (leading axis dropped for scalar input).
    Basis functions are evaluated on the solver grid, so modes that alias
    to zero on that grid contribute nothing, exactly as they do to X.
    """
    _require_phi42(cfg)
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1:
        raise InvalidArgumentError("times must be scalar or one-dimensional")
    if np.any(t < 0):
        raise InvalidArgumentError("times must be nonnegative")
    field = _counterterm_cached(
        degree, cfg.basis.lengths, cfg.n_space, cfg.sigma, tuple(t.tolist())
    )
    if np.isscalar(times) or np.ndim(times) == 0:
        return field[0]
    return field


def renorm_constant_scalar(degree: int, times, cfg: EquationConfig) -> np.ndarray:
    """Domain average of the counterterm: sigma^2 sum_q (1-e^{-2 lam_q t})/(2 lam_q).

    Uses the continuum normalization (each mode integrates to one over the
    domain), so all modes count, including any that alias to zero on the
    grid.  This is the scalar conditioning channel stored alongside the
    datasets; the field variant is what the Wick powers use.
    """
    _require_phi42(cfg)
    basis = BasisSpec("sine2d", degree, cfg.basis.lengths)
    lam = ou_rates(basis)
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(t < 0):
        raise InvalidArgumentError("times must be nonnegative")
    area = cfg.basis.lengths[0] * cfg.basis.lengths[1]
    vals = cfg.sigma**2 * np.sum(
        (1.0 - np.exp(-2.0 * np.outer(t, lam))) / (2.0 * lam)[None, :], axis=1
    ) / area
    if np.isscalar(times) or np.ndim(times) == 0:
        return vals[0]
    return vals


def _heat_symbol(cfg: EquationConfig) -> np.ndarray:
    # periodic spectral Laplacian symbol on the rfft2 lattice
    nx, ny = cfg.n_space
    lx, ly = cfg.lengths
    kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=1.0 / nx)[:, None] / lx
    ky = 2.0 * np.pi * np.arange(ny // 2 + 1)[None, :] / ly
    return kx**2 + ky**2


def stochastic_convolution(
    u0: np.ndarray,
    noise: NoisePath | None,
    cfg: EquationConfig,
    save_stride: int = 1,
) -> Trajectory:
    """Heat flow of u0 plus the exactly integrated driven part.

    The driven part regenerates the per-mode Brownian increments from the
    path's seed, bit for bit the ones that produced the grid increments,
    and advances each mode with the exact Ornstein-Uhlenbeck step.  The
    initial-state flow uses the periodic spectral heat semigroup, exact
    for mean-zero periodic data.
    """
    _require_phi42(cfg)
    _require_matching_basis(cfg, noise)
    u0 = _check_initial(u0, cfg)
    _check_noise(cfg, noise)
    stride = _check_stride(cfg, save_stride)
    n_saved = cfg.n_steps // stride + 1
    times = (np.arange(n_saved) * stride) * cfg.dt

    values = _heat_flow(u0, cfg, times)
    if noise is not None and cfg.sigma != 0.0:
        values = values + _driven_part(noise, cfg, stride)
    values[0] = u0  # exact, both summands vanish at t = 0

    traj = Trajectory(values, times, cfg, noise.seed if noise else None)
    return traj


def _heat_flow(u0: np.ndarray, cfg: EquationConfig, times: np.ndarray) -> np.ndarray:
    nx, ny = cfg.n_space
    u0_hat = np.fft.rfft2(u0)
    decay = np.exp(-_heat_symbol(cfg)[None] * times[:, None, None])
    return np.fft.irfft2(decay * u0_hat[None], s=(nx, ny), axes=(1, 2))


def _driven_part(noise: NoisePath, cfg: EquationConfig, stride: int) -> np.ndarray:
    basis = noise.basis
    lam = ou_rates(basis)
    lam_spec = eigenvalues(noise.spectrum, basis)
    dt = cfg.dt
    # regenerate the exact increments the grid path consumed, then truncate
    d_beta = brownian_mode_increments(
        basis, noise.n_steps, dt, noise.seed, noise.n_trajectories
    )[: cfg.n_steps]
    decay = np.exp(-lam * dt)
    spread = np.sqrt((1.0 - np.exp(-2.0 * lam * dt)) / (2.0 * lam * dt))
    gain = cfg.sigma * np.sqrt(lam_spec) * spread

    n_saved = cfg.n_steps // stride + 1
    coeffs = np.zeros((n_saved, basis.n_modes))
    c = np.zeros(basis.n_modes)
    out = 1
    for step in range(cfg.n_steps):
        c = decay * c + gain * d_beta[step]
        if (step + 1) % stride == 0:
            coeffs[out] = c
            out += 1

    j_pos, k_pos = _scatter_order_2d("sine2d", basis.degree)
    grid_coef = np.zeros((n_saved, basis.degree, basis.degree))
    grid_coef[:, j_pos, k_pos] = coeffs
    fx = _sine_factor(basis.degree, basis.lengths[0], cfg.n_space[0])
    fy = _sine_factor(basis.degree, basis.lengths[1], cfg.n_space[1])
    return np.einsum("sjk,jx,ky->sxy", grid_coef, fx, fy, optimize=True)


def wick_powers(X: Trajectory, a: np.ndarray) -> tuple[Trajectory, Trajectory]:
    """Pointwise centered powers X2 = X^2 - a and X3 = X^3 - 3 a X."""
    a = np.asarray(a)
    if a.shape == X.values.shape[:1]:
        a = a[:, None, None]
    elif a.shape != X.values.shape:
        raise InvalidArgumentError(
            f"counterterm shape {a.shape} does not align with X {X.values.shape}"
        )
    x = X.values
    x2 = Trajectory(x**2 - a, X.times, X.config, X.seed)
    x3 = Trajectory(x**3 - 3.0 * a * x, X.times, X.config, X.seed)
    return x2, x3


def solve_shift(
    X: Trajectory,
    X2: Trajectory,
    X3: Trajectory,
    cfg: EquationConfig,
    v_bound: float = DEFAULT_SHIFT_BOUND,
) -> Trajectory:
    """Semi-implicit solve of the shift equation from v(0) = 0.

    Needs the convolution bundle at full step resolution; the cubic source
    is evaluated explicitly at the left endpoint of each step.
    """
    _require_phi42(cfg)
    for traj in (X, X2, X3):
        if traj.values.shape != (cfg.n_steps + 1,) + cfg.n_space:
            raise InvalidArgumentError(
                "shift solve needs X, X2, X3 at full step resolution "
                f"{(cfg.n_steps + 1,) + cfg.n_space}, got {traj.values.shape}"
            )
    nx, ny = cfg.n_space
    dt = cfg.dt
    denom = 1.0 + dt * _fd_symbol_2d(nx, ny, *cfg.dx)

    values = np.empty_like(X.values)
    v = np.zeros(cfg.n_space)
    values[0] = v
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(cfg.n_steps):
            x, x2, x3 = X.values[step], X2.values[step], X3.values[step]
            source = -(v**3 + 3.0 * v**2 * x + 3.0 * v * x2 + x3)
            v = np.fft.irfft2(np.fft.rfft2(v + dt * source) / denom, s=(nx, ny))
            if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > v_bound:
                raise DivergenceError(cfg.equation, step + 1, "shift bound exceeded")
            values[step + 1] = v
    return Trajectory(values, X.times, cfg, X.seed)


def renorm_bundle(
    u0: np.ndarray,
    noise: NoisePath | None,
    cfg: EquationConfig,
    save_stride: int = 1,
    v_bound: float = DEFAULT_SHIFT_BOUND,
) -> RenormBundle:
    """Run the full decomposition and return every intermediate field."""
    _require_phi42(cfg)
    stride = _check_stride(cfg, save_stride)
    X = stochastic_convolution(u0, noise, cfg)
    a = renorm_constant(cfg.basis.degree, X.times, cfg)
    X2, X3 = wick_powers(X, a)
    v = solve_shift(X, X2, X3, cfg, v_bound)
    u = Trajectory(X.values + v.values, X.times, cfg, X.seed)

    def thin(traj: Trajectory) -> Trajectory:
        if stride == 1:
            return traj
        return Trajectory(traj.values[::stride], traj.times[::stride], cfg, traj.seed)

    return RenormBundle(
        X=thin(X),
        a_eps=a[::stride],
        X2=thin(X2),
        X3=thin(X3),
        J=cfg.basis.degree,
        v=thin(v),
        u=thin(u),
    )


def solve_phi42_renormalized(
    u0: np.ndarray,
    noise: NoisePath | None,
    cfg: EquationConfig,
    save_stride: int = 1,
    v_bound: float = DEFAULT_SHIFT_BOUND,
) -> Trajectory:
    """Renormalized solution u = X + v on the saved time grid."""
    return renorm_bundle(u0, noise, cfg, save_stride, v_bound).solution()
