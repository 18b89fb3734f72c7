"""Truncated space-time noise on periodic domains.

A driving process W(t) = sum_q sqrt(lam_q) * phi_q(x) * beta_q(t) is built
from a finite family of spatial basis functions phi_q, per-mode variance
weights lam_q, and independent scalar Brownian motions beta_q.  sample_path
evaluates the per-step increments Delta W on a uniform grid;
increments_to_white_noise rescales them to the white-noise samples the
solvers consume.

Randomness is reproducible and nested across truncation degrees: each
trajectory draws one counter-based stream (numpy Philox keyed by seed and
trajectory index), consumed mode-major in a fixed canonical mode order in
which every lower degree is an exact prefix of every higher one.  A path at
degree 8 therefore reuses, bit for bit, the low-mode randomness of a degree
128 path sampled with the same seed, which is what makes coupled
cross-degree comparisons meaningful.

Basis kinds
-----------
sine1d   phi_j(x) = sqrt(2/L) sin(j pi x / L),    j = 1..J
sine2d   phi_jk(x,y) = sqrt(4/(Lx Ly)) sin(j pi x / Lx) sin(k pi y / Ly),
         j,k = 1..J
cexp2d   phi_jk(x,y) = exp(2i pi (j x / Lx + k y / Ly)) / sqrt(Lx Ly),
         j,k = -J/2+1..J/2 (J even)

The complex family is realized as a real field via
W = sqrt(2) * Re(sum sqrt(lam) phi beta) with independent complex beta whose
components have variance dt/2.  For index pairs (j,k), (-j,-k) this is
exactly the Hermitian-symmetrized field (beta_{-j,-k} = conj(beta_{j,k}));
for boundary rows j = J/2 or k = J/2, whose partner falls outside the index
set, it extends the construction with the same uniform per-mode variance
lam * dt * |phi|^2 and no special cases.  Grid evaluation goes through FFT
index folding, which equals pointwise evaluation of the truncated sum at the
grid nodes, aliasing included when the degree exceeds the grid size.

Spectrum kinds
--------------
identity      lam = 1 for every mode (space-time white noise)
polydecay1d   lam_j = (floor(j/2) + 1)^-(2r + 1 + eps)        (sine1d only)
gaussdecay2d  lam_jk = exp(-alpha (j^2 + k^2))                (cexp2d only)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse

from .errors import InvalidArgumentError, ResourceLimitError
from .grids import grid_1d

MAX_DEGREE = 4096
_EVAL_ENTRY_CAP = 1 << 27  # dense basis matrices beyond this are refused

_BASIS_KINDS = ("sine1d", "sine2d", "cexp2d")
_SPECTRUM_KINDS = ("identity", "polydecay1d", "gaussdecay2d")
_SPECTRUM_COMPAT = {
    "identity": _BASIS_KINDS,
    "polydecay1d": ("sine1d",),
    "gaussdecay2d": ("cexp2d",),
}


@dataclass(frozen=True)
class BasisSpec:
    """Spatial basis family: kind, per-dimension degree, domain lengths."""

    kind: str
    degree: int
    lengths: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _BASIS_KINDS:
            raise InvalidArgumentError(f"unknown basis kind {self.kind!r}")
        ndim = 1 if self.kind == "sine1d" else 2
        if len(self.lengths) != ndim:
            raise InvalidArgumentError(
                f"{self.kind} needs {ndim} domain length(s), got {self.lengths!r}"
            )
        if any(l <= 0 for l in self.lengths):
            raise InvalidArgumentError(f"domain lengths must be > 0: {self.lengths!r}")
        if self.degree < 1:
            raise InvalidArgumentError(f"degree must be >= 1, got {self.degree}")
        if self.degree > MAX_DEGREE:
            raise ResourceLimitError(
                f"degree {self.degree} exceeds the per-dimension cap {MAX_DEGREE}"
            )
        if self.kind == "cexp2d" and self.degree % 2 != 0:
            raise InvalidArgumentError("cexp2d degree must be even")

    @property
    def ndim(self) -> int:
        return len(self.lengths)

    @property
    def n_modes(self) -> int:
        return self.degree if self.ndim == 1 else self.degree**2


@dataclass(frozen=True)
class SpectrumSpec:
    """Per-mode variance weights lam_q attached to a basis."""

    kind: str
    r: float = 2.0
    eps: float = 0.001
    alpha: float = 0.005

    def __post_init__(self):
        if self.kind not in _SPECTRUM_KINDS:
            raise InvalidArgumentError(f"unknown spectrum kind {self.kind!r}")


CYLINDRICAL = SpectrumSpec("identity")


@dataclass
class NoisePath:
    """Per-step noise increments Delta W sampled on a uniform grid.

    increments has shape [n_steps, nx] or [n_steps, nx, ny]; entry n holds
    W(t_{n+1}) - W(t_n) for t_n = n * dt.
    """

    increments: np.ndarray
    dt: float
    basis: BasisSpec
    spectrum: SpectrumSpec
    seed: int
    n_trajectories: int = 1

    @property
    def n_steps(self) -> int:
        return self.increments.shape[0]

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return self.increments.shape[1:]

    def grid(self) -> tuple[np.ndarray, ...]:
        return tuple(
            grid_1d(n, l) for n, l in zip(self.grid_shape, self.basis.lengths)
        )


def _check_spectrum_basis(spectrum: SpectrumSpec, basis: BasisSpec) -> None:
    if basis.kind not in _SPECTRUM_COMPAT[spectrum.kind]:
        raise InvalidArgumentError(
            f"spectrum {spectrum.kind!r} is not defined for basis {basis.kind!r}"
        )


def _signed_rank(i: int) -> int:
    # 0, 1, -1, 2, -2, ... -> 0, 1, 2, 3, 4, ...
    return 2 * i - 1 if i > 0 else -2 * i


@lru_cache(maxsize=64)
def _mode_indices_cached(kind: str, degree: int):
    if kind == "sine1d":
        return (np.arange(1, degree + 1),)
    if kind == "sine2d":
        # rings by max(j, k); within a ring (R,1..R) then (1..R-1,R)
        jj, kk = [], []
        for ring in range(1, degree + 1):
            for k in range(1, ring + 1):
                jj.append(ring)
                kk.append(k)
            for j in range(1, ring):
                jj.append(j)
                kk.append(ring)
        return np.array(jj), np.array(kk)
    # cexp2d: rings by max(signed rank); J' < J index sets are prefixes
    half = degree // 2
    rng = range(-half + 1, half + 1)
    order = sorted(
        (max(_signed_rank(j), _signed_rank(k)), _signed_rank(j), _signed_rank(k), j, k)
        for j in rng
        for k in rng
    )
    jj = np.array([m[3] for m in order])
    kk = np.array([m[4] for m in order])
    return jj, kk


def mode_indices(basis: BasisSpec) -> tuple[np.ndarray, ...]:
    """Mode index arrays in the canonical (truncation-nested) order."""
    return _mode_indices_cached(basis.kind, basis.degree)


def eigenvalues(spectrum: SpectrumSpec, basis: BasisSpec) -> np.ndarray:
    """Per-mode variance weights lam_q aligned with mode_indices(basis)."""
    _check_spectrum_basis(spectrum, basis)
    if spectrum.kind == "identity":
        return np.ones(basis.n_modes)
    if spectrum.kind == "polydecay1d":
        (jj,) = mode_indices(basis)
        exponent = 2.0 * spectrum.r + 1.0 + spectrum.eps
        return (jj // 2 + 1).astype(float) ** (-exponent)
    jj, kk = mode_indices(basis)
    return np.exp(-spectrum.alpha * (jj.astype(float) ** 2 + kk.astype(float) ** 2))


def eval_basis(basis: BasisSpec, grid_shape: tuple[int, ...] | int) -> np.ndarray:
    """Dense matrix [n_modes, n_points] of basis values at grid nodes.

    Points are the uniform grid flattened row-major.  Complex for cexp2d.
    Intended for moderate sizes; large requests raise ResourceLimitError
    (sampling itself never materializes this matrix for cexp2d).
    """
    shape = _normalize_grid_shape(basis, grid_shape)
    n_points = int(np.prod(shape))
    if basis.n_modes * n_points > _EVAL_ENTRY_CAP:
        raise ResourceLimitError(
            f"dense basis matrix with {basis.n_modes}x{n_points} entries "
            f"exceeds the cap; use sample_path, which avoids it"
        )
    if basis.kind == "sine1d":
        (jj,) = mode_indices(basis)
        x = grid_1d(shape[0], basis.lengths[0])
        return _sine_rows(jj, x, basis.lengths[0])
    jj, kk = mode_indices(basis)
    x = grid_1d(shape[0], basis.lengths[0])
    y = grid_1d(shape[1], basis.lengths[1])
    if basis.kind == "sine2d":
        fx = _sine_rows(jj, x, basis.lengths[0])
        fy = _sine_rows(kk, y, basis.lengths[1])
        return (fx[:, :, None] * fy[:, None, :]).reshape(basis.n_modes, n_points)
    lx, ly = basis.lengths
    px = np.exp(2j * np.pi * np.outer(jj, x) / lx)
    py = np.exp(2j * np.pi * np.outer(kk, y) / ly)
    return (px[:, :, None] * py[:, None, :]).reshape(
        basis.n_modes, n_points
    ) / np.sqrt(lx * ly)


def _sine_rows(indices: np.ndarray, x: np.ndarray, length: float) -> np.ndarray:
    return np.sqrt(2.0 / length) * np.sin(np.outer(indices, x) * np.pi / length)


def _normalize_grid_shape(
    basis: BasisSpec, grid_shape: tuple[int, ...] | int
) -> tuple[int, ...]:
    if isinstance(grid_shape, (int, np.integer)):
        grid_shape = (int(grid_shape),)
    shape = tuple(int(n) for n in grid_shape)
    if len(shape) != basis.ndim:
        raise InvalidArgumentError(
            f"grid shape {shape} does not match a {basis.ndim}-d basis"
        )
    if any(n < 1 for n in shape):
        raise InvalidArgumentError(f"grid shape entries must be >= 1: {shape}")
    return shape


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise InvalidArgumentError(f"seed must be an integer, got {type(seed)}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise InvalidArgumentError("seed must fit in an unsigned 64-bit integer")
    return seed


def _trajectory_stream(seed: int, trajectory: int) -> np.random.Generator:
    key = np.array([seed, trajectory], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def brownian_mode_increments(
    basis: BasisSpec,
    n_steps: int,
    dt: float,
    seed: int,
    n_trajectories: int = 1,
) -> np.ndarray:
    """Per-mode Brownian increments, shape [n_steps, n_modes].

    Real N(0, dt) entries for sine bases; complex entries with component
    variance dt/2 for cexp2d.  Columns follow the canonical mode order, so
    for a lower degree with the same seed the array is exactly the left
    block of the higher-degree one.  Multiple trajectories are summed.
    """
    seed = _check_seed(seed)
    if n_steps < 1:
        raise InvalidArgumentError(f"n_steps must be >= 1, got {n_steps}")
    if dt <= 0:
        raise InvalidArgumentError(f"dt must be > 0, got {dt}")
    if n_trajectories < 1:
        raise InvalidArgumentError(f"n_trajectories must be >= 1, got {n_trajectories}")
    n_modes = basis.n_modes
    complex_modes = basis.kind == "cexp2d"
    total = None
    for traj in range(n_trajectories):
        gen = _trajectory_stream(seed, traj)
        if complex_modes:
            z = gen.standard_normal((n_modes, n_steps, 2))
            draw = (z[..., 0] + 1j * z[..., 1]) * np.sqrt(dt / 2.0)
        else:
            draw = gen.standard_normal((n_modes, n_steps)) * np.sqrt(dt)
        total = draw if total is None else total + draw
    return total.T


@lru_cache(maxsize=32)
def _sine_factor(degree: int, length: float, n: int) -> np.ndarray:
    # [degree, n] factor matrix; row j-1 is sqrt(2/L) sin(j pi x / L) on the grid
    return _sine_rows(np.arange(1, degree + 1), grid_1d(n, length), length)


@lru_cache(maxsize=32)
def _scatter_order_2d(kind: str, degree: int) -> tuple[np.ndarray, np.ndarray]:
    jj, kk = _mode_indices_cached(kind, degree)
    return jj - 1, kk - 1


@lru_cache(maxsize=32)
def _fold_matrix(degree: int, nx: int, ny: int) -> scipy.sparse.csr_matrix:
    # maps canonical cexp2d mode coefficients onto the [nx, ny] FFT lattice
    jj, kk = _mode_indices_cached("cexp2d", degree)
    flat = np.mod(jj, nx) * ny + np.mod(kk, ny)
    n_modes = len(jj)
    return scipy.sparse.csr_matrix(
        (np.ones(n_modes), (np.arange(n_modes), flat)),
        shape=(n_modes, nx * ny),
    )


def sample_path(
    basis: BasisSpec,
    spectrum: SpectrumSpec,
    grid_shape: tuple[int, ...] | int,
    n_steps: int,
    dt: float,
    seed: int,
    n_trajectories: int = 1,
) -> NoisePath:
    """Sample the increments of the truncated process on a uniform grid.

    increments[n][m] = sum_q sqrt(lam_q) phi_q(x_m) (beta_q(t_{n+1}) - beta_q(t_n)).
    """
    _check_spectrum_basis(spectrum, basis)
    shape = _normalize_grid_shape(basis, grid_shape)
    lam = eigenvalues(spectrum, basis)
    d_beta = brownian_mode_increments(basis, n_steps, dt, seed, n_trajectories)
    weighted = d_beta * np.sqrt(lam)[None, :]

    if basis.kind == "sine1d":
        values = weighted @ _sine_factor(basis.degree, basis.lengths[0], shape[0])
    elif basis.kind == "sine2d":
        j_pos, k_pos = _scatter_order_2d("sine2d", basis.degree)
        grid_coef = np.zeros((n_steps, basis.degree, basis.degree))
        grid_coef[:, j_pos, k_pos] = weighted
        fx = _sine_factor(basis.degree, basis.lengths[0], shape[0])
        fy = _sine_factor(basis.degree, basis.lengths[1], shape[1])
        values = np.einsum("sjk,jx,ky->sxy", grid_coef, fx, fy, optimize=True)
    else:
        nx, ny = shape
        lx, ly = basis.lengths
        fold = _fold_matrix(basis.degree, nx, ny)
        lattice = (fold.T @ weighted.T).T.reshape(n_steps, nx, ny)
        field = np.fft.ifft2(lattice, axes=(1, 2)) * (nx * ny)
        values = np.sqrt(2.0 / (lx * ly)) * field.real

    return NoisePath(
        increments=values,
        dt=dt,
        basis=basis,
        spectrum=spectrum,
        seed=seed,
        n_trajectories=n_trajectories,
    )


def increments_to_white_noise(path: NoisePath) -> np.ndarray:
    """Pointwise white-noise samples xi_hat = Delta W / dt."""
    return path.increments / path.dt


def increment_covariance(
    basis: BasisSpec,
    spectrum: SpectrumSpec,
    grid_shape: tuple[int, ...] | int,
    flat_a: int,
    flat_b: int,
    n_trajectories: int = 1,
) -> float:
    """Analytic one-step covariance Cov[dW(x_a), dW(x_b)] / dt between two
    flattened grid points, from the finite mode sum that sample_path uses."""
    phi = eval_basis(basis, grid_shape)
    lam = eigenvalues(spectrum, basis)
    prod = phi[:, flat_a] * np.conj(phi[:, flat_b])
    return float(n_trajectories * np.real(np.sum(lam * prod)))
