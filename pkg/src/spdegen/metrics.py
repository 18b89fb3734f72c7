"""Error metrics, spectral diagnostics, and solver timing.

relative_l2 is the benchmark metric: plain root-sum-square over every
retained space-time point, no quadrature weights, so consumers can
reproduce reported numbers from the stored arrays alone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, UndefinedMetricError


def _values(obj) -> np.ndarray:
    return np.asarray(obj.values if hasattr(obj, "values") else obj, dtype=float)


def relative_l2(pred, truth) -> float:
    """||pred - truth|| / ||truth|| over all points of the given arrays.

    Accepts plain arrays or Trajectory objects.  Callers comparing only a
    time slice pass the slices.
    """
    p = _values(pred)
    t = _values(truth)
    if p.shape != t.shape:
        raise InvalidArgumentError(f"shape mismatch: {p.shape} vs {t.shape}")
    denom = np.linalg.norm(t.ravel())
    if denom == 0.0:
        raise UndefinedMetricError("reference has zero norm")
    return float(np.linalg.norm((p - t).ravel()) / denom)


@dataclass
class ErrorReport:
    """Per-sample relative errors with their summary statistics."""

    values: np.ndarray
    mean: float
    std: float
    count: int

    @classmethod
    def from_values(cls, values) -> "ErrorReport":
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidArgumentError("need a non-empty 1-d value array")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("error values must be finite and >= 0")
        std = float(arr.std(ddof=1)) if arr.size > 1 else float("nan")
        return cls(values=arr, mean=float(arr.mean()), std=std, count=arr.size)


def high_freq_energy_fraction(field_2d: np.ndarray, k_cut: float) -> float:
    """Fraction of non-mean spectral energy above integer wavenumber k_cut.

    Energy at mode (mx, my) counts as high when sqrt(mx^2 + my^2) > k_cut,
    with mx, my the signed integer wavenumbers of the periodic field.  The
    mean mode is excluded from both numerator and denominator; fields with
    no non-mean energy return 0 by convention.
    """
    arr = np.asarray(field_2d, dtype=float)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"need a 2-d field, got shape {arr.shape}")
    if k_cut < 0:
        raise InvalidArgumentError("k_cut must be >= 0")
    nx, ny = arr.shape
    power = np.abs(np.fft.fft2(arr)) ** 2
    mx = np.fft.fftfreq(nx, d=1.0 / nx)
    my = np.fft.fftfreq(ny, d=1.0 / ny)
    radius = np.hypot(mx[:, None], my[None, :])
    keep = np.ones_like(power, dtype=bool)
    keep[0, 0] = False
    total = power[keep].sum()
    if total == 0.0:
        return 0.0
    high = power[keep & (radius > k_cut)].sum()
    return float(high / total)


@dataclass
class TimingReport:
    """Wall times of repeated runs, warm-up excluded."""

    label: str
    seconds: np.ndarray
    n_warmup: int
    mean: float = field(init=False)
    std: float = field(init=False)
    median: float = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.seconds, dtype=float)
        self.seconds = arr
        self.mean = float(arr.mean())
        self.std = float(arr.std(ddof=1)) if arr.size > 1 else float("nan")
        self.median = float(np.median(arr))


def time_callable(fn, n_repeats: int, warmup: int = 1, label: str = "") -> TimingReport:
    """Time fn() with a monotonic clock; warmup calls are run but dropped."""
    if n_repeats < 1:
        raise InvalidArgumentError("n_repeats must be >= 1")
    if warmup < 0:
        raise InvalidArgumentError("warmup must be >= 0")
    for _ in range(warmup):
        fn()
    out = np.empty(n_repeats)
    for i in range(n_repeats):
        start = time.perf_counter()
        fn()
        out[i] = time.perf_counter() - start
    return TimingReport(label=label, seconds=out, n_warmup=warmup)


def time_solver(
    equation: str,
    degree: int | None = None,
    method: str = "explicit",
    n_repeats: int = 5,
    warmup: int = 1,
    seed: int = 0,
    noise_variant: str = "cylindrical",
) -> TimingReport:
    """Per-sample generation time (noise sampling plus solve) for a preset.

    method selects the phi42 generator ("explicit" or "renormalized") and
    is ignored elsewhere.  Successive repeats advance the seed; the work
    is seed-independent, so this only guards against cache effects.
    """
    from . import initcond, renorm, solvers  # deferred: avoids import cycle

    from .noise import sample_path

    cfg = solvers.preset(equation, degree, noise_variant=noise_variant)
    if method not in ("explicit", "renormalized"):
        raise InvalidArgumentError(f"unknown method {method!r}")
    if method == "renormalized" and cfg.equation != "phi42":
        raise InvalidArgumentError("renormalized generation is phi42-only")

    kind = {
        "ginzburg-landau": "ginzburg-landau",
        "kdv": "kdv",
        "wave": "wave",
        "nse-vorticity": "nse-gaussian",
        "phi42": "phi42",
    }[cfg.equation]
    init = initcond.make_initial(
        initcond.InitSpec(kind, seed=seed), cfg.n_space, cfg.lengths
    )
    counter = [seed]

    def one_sample():
        counter[0] += 1
        path = sample_path(
            cfg.basis, cfg.spectrum, cfg.n_space, cfg.n_steps, cfg.dt,
            seed=counter[0], n_trajectories=cfg.n_trajectories,
        )
        if cfg.equation == "wave":
            solvers.solve_wave(init.u, init.v, cfg, path)
        elif cfg.equation == "phi42" and method == "renormalized":
            renorm.solve_phi42_renormalized(init.u, path, cfg)
        else:
            solvers.SOLVERS[
                "phi42-explicit" if cfg.equation == "phi42" else cfg.equation
            ](init.u, cfg, path)

    label = f"{cfg.equation}[{method}]" if cfg.equation == "phi42" else cfg.equation
    return time_callable(one_sample, n_repeats, warmup, label=label)
