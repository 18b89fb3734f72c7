"""Self-contained property checks behind the `validate` subcommand.

Each check is a pure function returning a CheckResult; run_all executes
the whole suite.  Checks use fixed seeds so a pass is reproducible, and
statistical gates sit at four standard errors so a correct sampler does
not trip them by chance at these fixed seeds.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dataset import downsample
from .errors import InvalidArgumentError
from .grids import grid_1d
from .noise import CYLINDRICAL, BasisSpec, increment_covariance, sample_path
from .renorm import wick_powers
from .solvers import (
    Trajectory,
    deterministic,
    preset,
    solve_ginzburg_landau,
    solve_phi42_explicit,
    solve_wave,
)

COVARIANCE_PROBE_PAIRS = ((64, 64), (16, 48), (8, 8), (5, 59), (100, 27))


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name:<28} measured={self.measured:.3e} "
            f"bound={self.bound:.3e}  {self.detail}"
        )


def check_noise_covariance(n_draws: int = 10_000, seed: int = 101) -> CheckResult:
    """Monte Carlo covariance against the analytic mode sum.

    Five probe point pairs on a 128-point grid, sine basis at degree 32;
    each of the n_draws increments is an independent path sample.
    """
    basis = BasisSpec("sine1d", 32, (1.0,))
    dt = 1e-3
    path = sample_path(basis, CYLINDRICAL, 128, n_draws, dt, seed=seed)
    worst = 0.0
    for a, b in COVARIANCE_PROBE_PAIRS:
        xa = path.increments[:, a]
        xb = path.increments[:, b]
        target = increment_covariance(basis, CYLINDRICAL, 128, a, b) * dt
        est = float(np.mean(xa * xb))
        stderr = float(np.sqrt((xa.var() * xb.var() + target**2) / n_draws))
        worst = max(worst, abs(est - target) / stderr)
    return CheckResult(
        name="noise-covariance",
        passed=worst < 4.0,
        measured=worst,
        bound=4.0,
        detail=f"max deviation over {len(COVARIANCE_PROBE_PAIRS)} probe pairs, "
        f"in stderr units ({n_draws} draws)",
    )


def check_wave_standing_wave() -> CheckResult:
    """Linear leapfrog run against cos(2 pi t) sin(2 pi x)."""
    cfg = deterministic(preset("wave"), nonlinear=False)
    x = grid_1d(cfg.n_space[0])
    u0 = np.sin(2 * np.pi * x)
    traj = solve_wave(u0, np.zeros_like(u0), cfg)
    exact = np.cos(2 * np.pi * cfg.t_final) * np.sin(2 * np.pi * x)
    err = float(np.linalg.norm(traj.final() - exact) / np.linalg.norm(exact))
    return CheckResult(
        name="wave-standing-wave",
        passed=err < 1e-3,
        measured=err,
        bound=1e-3,
        detail="relative L2 error at t = T",
    )


def check_phi42_explicit_gate() -> CheckResult:
    """A step violating dt/dx^2 < 1/4 must be refused, not attempted."""
    cfg = deterministic(preset("phi42"), n_steps=5)
    ratio = cfg.dt / min(cfg.dx) ** 2
    try:
        solve_phi42_explicit(np.zeros(cfg.n_space), cfg)
    except InvalidArgumentError:
        rejected = True
    else:
        rejected = False
    return CheckResult(
        name="phi42-explicit-gate",
        passed=rejected,
        measured=ratio,
        bound=0.25,
        detail="config over the stability bound raises invalid-argument",
    )


def check_wick_identities(seed: int = 7) -> CheckResult:
    """X2 = X^2 - a and X3 = X^3 - 3 a X, bitwise on random fields."""
    rng = np.random.default_rng(seed)
    cfg = preset("phi42", degree=8)
    x = rng.standard_normal((6, 8, 8))
    a = rng.uniform(0.1, 2.0, size=(6, 8, 8))
    traj = Trajectory(x, np.arange(6) * cfg.dt, cfg)
    X2, X3 = wick_powers(traj, a)
    exact = np.array_equal(X2.values, x**2 - a) and np.array_equal(
        X3.values, x**3 - 3 * a * x
    )
    return CheckResult(
        name="wick-identities",
        passed=exact,
        measured=0.0 if exact else 1.0,
        bound=0.0,
        detail="bitwise algebraic identities on random fields",
    )


def check_determinism(seed: int = 55) -> CheckResult:
    """Same seed twice gives bitwise identical noise and solution."""
    cfg = preset("ginzburg-landau", degree=32)
    basis = BasisSpec("sine1d", 32, (1.0,))

    def run():
        path = sample_path(
            basis, CYLINDRICAL, cfg.n_space, cfg.n_steps, cfg.dt, seed=seed
        )
        u0 = np.sin(2 * np.pi * grid_1d(cfg.n_space[0]))
        return path.increments, solve_ginzburg_landau(u0, cfg, path).values

    inc1, u1 = run()
    inc2, u2 = run()
    same = np.array_equal(inc1, inc2) and np.array_equal(u1, u2)
    return CheckResult(
        name="determinism",
        passed=same,
        measured=0.0 if same else 1.0,
        bound=0.0,
        detail="repeated seeded run is bitwise identical",
    )


def check_downsample_commutes(seed: int = 3) -> CheckResult:
    """Saving every 5th step equals saving all steps then striding."""
    cfg = preset("wave", degree=32)
    basis = BasisSpec("sine1d", 32, (1.0,))
    path = sample_path(basis, CYLINDRICAL, cfg.n_space, cfg.n_steps, cfg.dt, seed=seed)
    x = grid_1d(cfg.n_space[0])
    u0, v0 = np.sin(2 * np.pi * x), np.zeros(cfg.n_space[0])
    strided = solve_wave(u0, v0, cfg, path, save_stride=5)
    full = downsample(solve_wave(u0, v0, cfg, path), t_stride=5, x_stride=1)
    same = np.array_equal(strided.values, full.values) and np.array_equal(
        strided.times, full.times
    )
    return CheckResult(
        name="downsample-commutes",
        passed=same,
        measured=0.0 if same else 1.0,
        bound=0.0,
        detail="strided save equals full save then stride, bitwise",
    )


def run_all(n_draws: int = 10_000, seed: int = 101) -> list[CheckResult]:
    return [
        check_noise_covariance(n_draws=n_draws, seed=seed),
        check_wave_standing_wave(),
        check_phi42_explicit_gate(),
        check_wick_identities(),
        check_determinism(),
        check_downsample_commutes(),
    ]


def render_table(results: list[CheckResult]) -> str:
    return "\n".join(r.line() for r in results)


def results_json(results: list[CheckResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "n_failed": sum(not r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }
