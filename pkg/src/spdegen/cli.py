"""Command line entry point: generate, validate, compare-phi42, bench, inspect.

Configs are YAML with single inheritance via `extends:` (child keys win)
and a required `preset:` naming the equation.  Per-sample seeds come from
a splittable derivation off the master seed keyed by (equation code,
truncation degree, sample index), so enlarging a run never reshuffles the
samples already generated, and any sample can be regenerated bit for bit
from the seeds recorded in the file metadata.

Exit codes: 0 success, 2 bad configuration or arguments, 3 divergence
during generation, 4 validation failure.  Interrupting `generate` leaves
per-sample staging files next to the target path; rerunning the same
command resumes from them.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import pathlib
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np
import yaml

from . import __version__
from .dataset import (
    DatasetRecord,
    coarsen_noise,
    downsample,
    file_name,
    read_parquet,
    record_from_samples,
    split_indices,
    training_view,
    write_parquet,
)
from .errors import ConfigError, DivergenceError, InvalidArgumentError, SchemaError, SpdegenError
from .initcond import InitSpec, make_initial
from .metrics import ErrorReport, high_freq_energy_fraction, relative_l2, time_solver
from .noise import sample_path
from .renorm import renorm_bundle, renorm_constant_scalar
from .solvers import (
    EQUATIONS,
    EXPORT_STRIDES,
    PRESET_DEGREES,
    SAMPLE_COUNT,
    SOLVERS,
    preset,
    solve_wave,
)
from .validation import render_table, results_json, run_all

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_VALIDATION = 4

OUTDIR_ENV = "SPDEGEN_OUTDIR"

EQUATION_CODES = {
    "ginzburg-landau": 1,
    "kdv": 2,
    "wave": 3,
    "nse-vorticity": 4,
    "phi42": 5,
}

# amplitude of the rough initial-condition perturbation for the varying-IC task
DEFAULT_KAPPA = 0.1

# fixed draw used when the vorticity task keeps the initial state constant
NSE_ANCHOR_SEED = 0

_INIT_KINDS = {
    "ginzburg-landau": "ginzburg-landau",
    "kdv": "kdv",
    "wave": "wave",
    "nse-vorticity": "nse-gaussian",
    "phi42": "phi42",
}

_CONFIG_KEYS = {
    "preset",
    "extends",
    "task",
    "degrees",
    "samples",
    "seed",
    "method",
    "sigma",
    "kappa",
    "noise",
    "outdir",
    "workers",
}


@dataclasses.dataclass
class RunConfig:
    """Resolved generation run: one equation, a degree sweep, sample count."""

    equation: str
    task: str = "xi"
    degrees: tuple[int, ...] = ()
    samples: int = SAMPLE_COUNT
    seed: int = 0
    method: str = "expl"
    sigma: float | None = None
    kappa: float | None = None
    noise: str = "cylindrical"
    outdir: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ConfigError(f"unknown preset {self.equation!r}")
        if self.task not in ("xi", "u0_xi"):
            raise ConfigError(f"task must be 'xi' or 'u0_xi', got {self.task!r}")
        # YAML 1.1 reads floats like 1.0e8 as strings; coerce and complain
        # here rather than deep inside a solver
        for name in ("sigma", "kappa"):
            value = getattr(self, name)
            if value is not None:
                try:
                    setattr(self, name, float(value))
                except (TypeError, ValueError):
                    raise ConfigError(f"{name} must be a number, got {value!r}")
        for name in ("samples", "seed", "workers"):
            try:
                setattr(self, name, int(getattr(self, name)))
            except (TypeError, ValueError):
                raise ConfigError(f"{name} must be an integer, got {getattr(self, name)!r}")
        if not self.degrees:
            self.degrees = PRESET_DEGREES[self.equation]
        self.degrees = tuple(int(j) for j in self.degrees)
        if any(j < 1 for j in self.degrees):
            raise ConfigError(f"degrees must be >= 1: {self.degrees}")
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if self.method not in ("expl", "reno"):
            raise ConfigError(f"method must be 'expl' or 'reno', got {self.method!r}")
        if self.method == "reno" and self.equation != "phi42":
            raise ConfigError("method 'reno' applies to the phi42 preset only")
        if self.noise not in ("cylindrical", "q"):
            raise ConfigError(f"noise must be 'cylindrical' or 'q', got {self.noise!r}")
        if self.noise == "q" and self.equation != "kdv":
            raise ConfigError("the 'q' covariance variant applies to kdv only")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @property
    def resolved_kappa(self) -> float:
        if self.kappa is not None:
            return float(self.kappa)
        return DEFAULT_KAPPA if self.task == "u0_xi" else 0.0


def _load_yaml(path: pathlib.Path) -> dict:
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a mapping")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
    return raw


def resolve_config(path: str | pathlib.Path, _seen: tuple = ()) -> dict:
    """Load a YAML config, following `extends:` chains (child keys win)."""
    path = pathlib.Path(path).resolve()
    if path in _seen:
        chain = " -> ".join(str(p) for p in _seen + (path,))
        raise ConfigError(f"config inheritance cycle: {chain}")
    raw = _load_yaml(path)
    parent = raw.pop("extends", None)
    if parent is None:
        return raw
    base = resolve_config(path.parent / parent, _seen + (path,))
    base.update(raw)
    return base


def load_run_config(path: str | pathlib.Path, **overrides) -> RunConfig:
    data = resolve_config(path)
    if "preset" not in data:
        raise ConfigError(f"config {path} does not name a preset")
    data["equation"] = data.pop("preset")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**data)


def child_seeds(master: int, equation: str, degree: int, index: int) -> tuple[int, int]:
    """(noise seed, initial-condition seed) for one sample.

    Keyed so that every (equation, degree, index) triple owns a fixed
    stream regardless of how many samples a run asks for.
    """
    ss = np.random.SeedSequence(
        master, spawn_key=(EQUATION_CODES[equation], degree, index)
    )
    noise_seed, ic_seed = ss.generate_state(2, np.uint64)
    return int(noise_seed), int(ic_seed)


def _build_config(rc: RunConfig, degree: int):
    return preset(
        rc.equation,
        degree,
        sigma=rc.sigma,
        noise_variant="q" if rc.noise == "q" else "cylindrical",
    )


def _initial_spec(rc: RunConfig, ic_seed: int) -> InitSpec:
    kind = _INIT_KINDS[rc.equation]
    if rc.equation == "nse-vorticity":
        seed = ic_seed if rc.task == "u0_xi" else NSE_ANCHOR_SEED
        return InitSpec(kind, seed=seed)
    if rc.task == "u0_xi":
        return InitSpec(kind, kappa=rc.resolved_kappa, seed=ic_seed)
    return InitSpec(kind, kappa=rc.resolved_kappa or 0.0, seed=None)


def _compute_sample(rc: RunConfig, degree: int, index: int):
    """One sample: returns (index, seeds, u, xi) with u/xi float32, or the
    seeds with u = None when the solve diverged."""
    cfg = _build_config(rc, degree)
    noise_seed, ic_seed = child_seeds(rc.seed, rc.equation, degree, index)
    path = sample_path(
        cfg.basis, cfg.spectrum, cfg.n_space, cfg.n_steps, cfg.dt,
        seed=noise_seed, n_trajectories=cfg.n_trajectories,
    )
    init = make_initial(_initial_spec(rc, ic_seed), cfg.n_space, cfg.lengths)
    try:
        if rc.equation == "wave":
            traj = solve_wave(init.u, init.v, cfg, path)
        elif rc.equation == "phi42" and rc.method == "reno":
            traj = renorm_bundle(init.u, path, cfg).u
        else:
            key = "phi42-explicit" if rc.equation == "phi42" else rc.equation
            traj = SOLVERS[key](init.u, cfg, path)
    except DivergenceError:
        return index, (noise_seed, ic_seed), None, None
    t_stride, x_stride = EXPORT_STRIDES[rc.equation]
    u = downsample(training_view(traj), t_stride, x_stride).values.astype(np.float32)
    xi = coarsen_noise(path, t_stride, x_stride).astype(np.float32)
    return index, (noise_seed, ic_seed), u, xi


def _stage_dir(outdir: pathlib.Path, stem: str) -> pathlib.Path:
    return outdir / f".{stem}.partial"


def _generate_degree(rc: RunConfig, degree: int, outdir: pathlib.Path) -> dict:
    """Generate one dataset file; returns summary with failure count."""
    cfg = _build_config(rc, degree)
    meta_stub = {
        "equation": rc.equation,
        "task": rc.task,
        "degree": degree,
        "n_samples": rc.samples,
        "method": rc.method,
        "sigma": cfg.sigma,
        "spectrum": cfg.spectrum.kind,
    }
    stem = file_name(meta_stub)[: -len(".parquet")]
    stage = _stage_dir(outdir, stem)
    stage.mkdir(parents=True, exist_ok=True)

    # only fields that determine the file contents; outdir and workers
    # may legitimately change between a run and its resume
    fingerprint = {
        "equation": rc.equation,
        "task": rc.task,
        "samples": rc.samples,
        "seed": rc.seed,
        "method": rc.method,
        "sigma": rc.sigma,
        "kappa": rc.resolved_kappa,
        "noise": rc.noise,
        "degree": degree,
    }
    fp_file = stage / "config.json"
    fp_json = json.dumps(fingerprint, sort_keys=True, default=str)
    if fp_file.exists():
        if fp_file.read_text() != fp_json:
            raise ConfigError(
                f"staging directory {stage} belongs to a different run; "
                "remove it or change the output directory"
            )
    else:
        fp_file.write_text(fp_json)

    pending = [
        i for i in range(rc.samples)
        if not (stage / f"{i:06d}.npz").exists()
    ]
    if rc.workers > 1 and pending:
        with ProcessPoolExecutor(max_workers=rc.workers) as pool:
            futures = [
                pool.submit(_compute_sample, rc, degree, i) for i in pending
            ]
            for fut in futures:
                _store_sample(stage, *fut.result())
    else:
        for i in pending:
            _store_sample(stage, *_compute_sample(rc, degree, i))

    samples, seeds, failed = [], [], []
    for i in range(rc.samples):
        with np.load(stage / f"{i:06d}.npz") as payload:
            pair = [int(payload["noise_seed"]), int(payload["ic_seed"])]
            if bool(payload["diverged"]):
                failed.append({"index": i, "seeds": pair})
            else:
                samples.append((payload["u"], payload["xi"]))
                seeds.append(pair)
    if not samples:
        raise DivergenceError(rc.equation, 0, "every sample diverged")

    u = np.stack([s[0] for s in samples])
    xi = np.stack([s[1] for s in samples])
    a_eps = None
    if rc.equation == "phi42":
        t_stride, _ = EXPORT_STRIDES[rc.equation]
        kept_times = (np.arange(cfg.n_steps) * t_stride)[: u.shape[1]] * cfg.dt
        a_eps = renorm_constant_scalar(degree, kept_times, cfg)

    metadata = {
        **meta_stub,
        "n_samples": len(samples),
        "requested_samples": rc.samples,
        "kappa": rc.resolved_kappa,
        "master_seed": rc.seed,
        "split_seed": rc.seed,
        "sample_seeds": seeds,
        "failed": failed,
        "t_final": cfg.t_final,
        "n_steps": cfg.n_steps,
        "n_space": list(cfg.n_space),
        "lengths": list(cfg.lengths),
        "export_strides": list(EXPORT_STRIDES[rc.equation]),
    }
    if a_eps is not None:
        metadata["a_eps_kind"] = "domain-averaged scalar"
    record = record_from_samples(u, xi, metadata=metadata, a_eps=a_eps)
    timestamp = datetime.now(timezone.utc).isoformat()
    # named by the requested count so the target path is stable even when
    # diverged samples are excluded from the columns
    path = write_parquet(
        record, path=outdir / file_name(meta_stub), timestamp=timestamp
    )
    shutil.rmtree(stage)
    return {"path": str(path), "n_failed": len(failed), "n_written": len(samples)}


def _store_sample(stage, index, seed_pair, u, xi):
    target = stage / f"{index:06d}.npz"
    tmp = stage / f"{index:06d}.tmp.npz"
    diverged = u is None
    arrays = {
        "noise_seed": np.uint64(seed_pair[0]),
        "ic_seed": np.uint64(seed_pair[1]),
        "diverged": np.bool_(diverged),
    }
    if not diverged:
        arrays["u"] = u
        arrays["xi"] = xi
    else:
        arrays["u"] = np.zeros(0, dtype=np.float32)
        arrays["xi"] = np.zeros(0, dtype=np.float32)
    with open(tmp, "wb") as fh:
        np.savez(fh, **arrays)
    os.replace(tmp, target)


def _resolve_outdir(explicit: str | None) -> pathlib.Path:
    if explicit:
        return pathlib.Path(explicit)
    return pathlib.Path(os.environ.get(OUTDIR_ENV, "."))


def run_generate(args) -> int:
    rc = load_run_config(
        args.config,
        samples=args.samples,
        outdir=args.outdir,
        workers=args.workers,
        degrees=tuple(args.degrees) if args.degrees else None,
    )
    outdir = _resolve_outdir(rc.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    diverged = 0
    try:
        for degree in rc.degrees:
            summary = _generate_degree(rc, degree, outdir)
            diverged += summary["n_failed"]
            print(
                f"wrote {summary['path']} ({summary['n_written']} samples"
                + (f", {summary['n_failed']} diverged" if summary["n_failed"] else "")
                + ")"
            )
    except KeyboardInterrupt:
        print(
            f"interrupted; completed samples staged under {outdir}, "
            "rerun the same command to resume",
            file=sys.stderr,
        )
        return 130
    if diverged:
        print(f"{diverged} samples diverged and were excluded", file=sys.stderr)
        return EXIT_DIVERGENCE
    return EXIT_OK


def run_validate(args) -> int:
    results = run_all(n_draws=args.draws, seed=args.seed)
    print(render_table(results))
    payload = results_json(results)
    if args.json:
        pathlib.Path(args.json).write_text(json.dumps(payload, indent=2))
    return EXIT_OK if payload["passed"] else EXIT_VALIDATION


def run_compare_phi42(args) -> int:
    """Coupled explicit/renormalized comparison at one truncation degree.

    Every sample shares its noise path and initial state across the two
    methods; emits mean fields (CSV) plus summary numbers (JSON).
    """
    cfg = preset("phi42", args.degree)
    outdir = _resolve_outdir(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    init = make_initial(InitSpec("phi42"), cfg.n_space, cfg.lengths)

    sum_expl = np.zeros(cfg.n_space)
    sum_reno = np.zeros(cfg.n_space)
    paired = []
    for i in range(args.samples):
        noise_seed, _ = child_seeds(args.seed, "phi42", args.degree, i)
        path = sample_path(
            cfg.basis, cfg.spectrum, cfg.n_space, cfg.n_steps, cfg.dt,
            seed=noise_seed,
        )
        u_expl = SOLVERS["phi42-explicit"](init.u, cfg, path).values[args.t_index]
        u_reno = renorm_bundle(init.u, path, cfg).u.values[args.t_index]
        sum_expl += u_expl
        sum_reno += u_reno
        paired.append(relative_l2(u_reno, u_expl))

    mean_expl = sum_expl / args.samples
    mean_reno = sum_reno / args.samples
    frac_expl = high_freq_energy_fraction(mean_expl, k_cut=args.k_cut)
    frac_reno = high_freq_energy_fraction(mean_reno, k_cut=args.k_cut)
    report = ErrorReport.from_values(np.array(paired))

    np.savetxt(outdir / "phi42_mean_expl.csv", mean_expl, delimiter=",")
    np.savetxt(outdir / "phi42_mean_reno.csv", mean_reno, delimiter=",")
    summary = {
        "degree": args.degree,
        "samples": args.samples,
        "seed": args.seed,
        "t_index": args.t_index,
        "k_cut": args.k_cut,
        "high_freq_fraction": {"expl": frac_expl, "reno": frac_reno},
        "paired_relative_l2": {
            "mean": report.mean,
            "std": report.std,
            "count": report.count,
        },
    }
    (outdir / "phi42_compare.json").write_text(json.dumps(summary, indent=2))
    print(
        f"high-frequency energy fraction (k > {args.k_cut}) of the mean field: "
        f"explicit {frac_expl:.3e}, renormalized {frac_reno:.3e}"
    )
    return EXIT_OK


def run_bench(args) -> int:
    rows = []
    methods = ("explicit", "renormalized") if args.equation == "phi42" else ("explicit",)
    if args.method:
        methods = (args.method,)
    for method in methods:
        report = time_solver(
            args.equation,
            degree=args.degree,
            method=method,
            n_repeats=args.repeats,
            warmup=args.warmup,
            seed=args.seed,
        )
        rows.append(
            {
                "label": report.label,
                "mean_s": report.mean,
                "median_s": report.median,
                "std_s": report.std,
                "repeats": len(report.seconds),
            }
        )
    header = f"{'generator':<28}{'median [s]':>12}{'mean [s]':>12}"
    print(header)
    for row in rows:
        print(f"{row['label']:<28}{row['median_s']:>12.4f}{row['mean_s']:>12.4f}")
    if args.json:
        pathlib.Path(args.json).write_text(json.dumps(rows, indent=2))
    return EXIT_OK


def run_inspect(args) -> int:
    record = read_parquet(args.path)
    print(f"file      {args.path}")
    print(f"dims      {record.dims}  (samples, time, space...)")
    print(f"columns   {', '.join(record.columns)}")
    train, valid, test = split_indices(
        record.n_samples, int(record.metadata.get("split_seed", 0))
    )
    print(f"split     {len(train)}/{len(valid)}/{len(test)} train/valid/test")
    for key in sorted(record.metadata):
        if key in ("sample_seeds", "failed"):
            continue
        print(f"  {key}: {record.metadata[key]}")
    failed = record.metadata.get("failed", [])
    if failed:
        print(f"  failed: {len(failed)} diverged samples excluded")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdegen", description="Benchmark dataset generator for SPDEs."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate datasets from a config file")
    gen.add_argument("--config", required=True, help="YAML run configuration")
    gen.add_argument("--samples", type=int, default=None, help="override sample count")
    gen.add_argument(
        "--degrees", type=int, nargs="+", default=None, help="override degree sweep"
    )
    gen.add_argument("--outdir", default=None, help=f"output dir (default ${OUTDIR_ENV} or .)")
    gen.add_argument("--workers", type=int, default=None, help="parallel workers")
    gen.set_defaults(func=run_generate)

    val = sub.add_parser("validate", help="run the property check suite")
    val.add_argument("--draws", type=int, default=10_000, help="Monte Carlo draws")
    val.add_argument("--seed", type=int, default=101)
    val.add_argument("--json", default=None, help="also write a JSON report here")
    val.set_defaults(func=run_validate)

    cmp_ = sub.add_parser(
        "compare-phi42", help="coupled explicit vs renormalized comparison"
    )
    cmp_.add_argument("--degree", type=int, default=128)
    cmp_.add_argument("--samples", type=int, default=300)
    cmp_.add_argument("--seed", type=int, default=7)
    cmp_.add_argument("--t-index", type=int, default=249, dest="t_index")
    cmp_.add_argument("--k-cut", type=int, default=8, dest="k_cut")
    cmp_.add_argument("--outdir", default=None)
    cmp_.set_defaults(func=run_compare_phi42)

    ben = sub.add_parser("bench", help="per-sample generation timings")
    ben.add_argument("--equation", default="phi42", choices=EQUATIONS)
    ben.add_argument("--degree", type=int, default=None)
    ben.add_argument("--method", default=None, choices=("explicit", "renormalized"))
    ben.add_argument("--repeats", type=int, default=5)
    ben.add_argument("--warmup", type=int, default=1)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--json", default=None)
    ben.set_defaults(func=run_bench)

    ins = sub.add_parser("inspect", help="print dataset metadata")
    ins.add_argument("path")
    ins.set_defaults(func=run_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidArgumentError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except SpdegenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
