"""Columnar packaging of trajectories into Parquet datasets.

Every signal is stored as one float32 column of length N*T*X(*Y) in
row-major order with the sample axis outermost, then time, then space.
Consumers reshape with the dims carried in the metadata:

    u = record.column("u").reshape(record.dims)

Solves run in float64; casting to 32-bit happens once at packaging time.
Metadata (equation, task, degree, coupling, seeds, scheme version) rides
in the Parquet key-value footer, byte-stable across reruns; a sidecar
.meta.json next to the file repeats it for human inspection together
with the only timestamp we record anywhere.

The initial state is not a separate column: the first retained time
slice of u is the initial condition, since exported trajectories keep
the first N_t states (t = 0 .. T - dt), one per noise increment.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pyarrow as pa
import pyarrow.parquet as pq

from .errors import InvalidArgumentError, SchemaError
from .noise import NoisePath
from .solvers import Trajectory

FORMAT_VERSION = 1
SCHEME_VERSION = "spdegen-1"

_METADATA_KEY = b"spdegen"

SPLIT_FRACTIONS = (0.70, 0.15, 0.15)

_NAME_1D = {
    "ginzburg-landau": "GinzburgLandau",
    "kdv": "KdV",
    "wave": "Wave",
    "nse-vorticity": "NSE",
}

TASKS = ("xi", "u0_xi")


def flatten(tensor: np.ndarray) -> np.ndarray:
    """Row-major 1D view-copy; pair with the recorded dims to invert."""
    return np.ascontiguousarray(tensor).reshape(-1)


def unflatten(column: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(column)
    if arr.ndim != 1 or arr.size != int(np.prod(dims)):
        raise InvalidArgumentError(
            f"column of length {arr.size} does not fill dims {dims}"
        )
    return arr.reshape(dims)


def downsample(traj: Trajectory, t_stride: int, x_stride: int) -> Trajectory:
    """Strided subsampling keeping index 0 on every axis, no filtering.

    The time axis accepts both slice counts in circulation: the windowed
    count n_steps (training view) and the inclusive count n_steps + 1
    (raw trajectory, where the stride then also retains the final state,
    matching a solver run saved with the same stride).
    """
    values = traj.values
    n_t = values.shape[0]
    if t_stride < 1 or (n_t % t_stride != 0 and (n_t - 1) % t_stride != 0):
        raise InvalidArgumentError(
            f"t_stride {t_stride} does not divide {n_t} saved states"
        )
    for n in values.shape[1:]:
        if x_stride < 1 or n % x_stride != 0:
            raise InvalidArgumentError(
                f"x_stride {x_stride} does not divide grid axis of size {n}"
            )
    slicer = (slice(None, None, t_stride),) + (slice(None, None, x_stride),) * (
        values.ndim - 1
    )
    return Trajectory(
        values[slicer], traj.times[::t_stride], traj.config, traj.seed
    )


def training_view(traj: Trajectory) -> Trajectory:
    """First N_t saved states (t = 0 .. T - dt), one per noise increment.

    The state at exactly T is dropped so the time axis aligns with the
    noise columns; it stays available on the Trajectory itself.
    """
    return Trajectory(traj.values[:-1], traj.times[:-1], traj.config, traj.seed)


def coarsen_noise(path: NoisePath, t_stride: int, x_stride: int) -> np.ndarray:
    """White-noise values xi on the coarse grid.

    Increments are summed over windows of t_stride steps (the coarse
    process is again a Brownian increment sequence, exactly), strided in
    space, then divided by the coarse step to give xi = dW/dt.
    """
    inc = path.increments
    n_steps = inc.shape[0]
    if t_stride < 1 or n_steps % t_stride != 0:
        raise InvalidArgumentError(
            f"t_stride {t_stride} does not divide {n_steps} increments"
        )
    for n in inc.shape[1:]:
        if x_stride < 1 or n % x_stride != 0:
            raise InvalidArgumentError(
                f"x_stride {x_stride} does not divide grid axis of size {n}"
            )
    spatial = (slice(None, None, x_stride),) * (inc.ndim - 1)
    strided = inc[(slice(None),) + spatial]
    grouped = strided.reshape((n_steps // t_stride, t_stride) + strided.shape[1:])
    coarse_dt = path.dt * t_stride
    return grouped.sum(axis=1) / coarse_dt


@dataclass
class DatasetRecord:
    """Flattened columns plus the dims and metadata needed to reshape."""

    columns: dict[str, np.ndarray]
    dims: tuple[int, ...]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.validate()

    def validate(self) -> None:
        if len(self.dims) not in (3, 4) or any(d < 1 for d in self.dims):
            raise SchemaError(f"dims must be (N, T, X[, Y]) >= 1, got {self.dims}")
        if not self.columns:
            raise SchemaError("record has no columns")
        expected = int(np.prod(self.dims))
        for name, col in self.columns.items():
            arr = np.asarray(col)
            if arr.ndim != 1 or arr.size != expected:
                raise SchemaError(
                    f"column {name!r} has length {arr.size}, dims {self.dims} "
                    f"require {expected}"
                )

    @property
    def n_samples(self) -> int:
        return self.dims[0]

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SchemaError(f"no column {name!r}; have {sorted(self.columns)}")
        return self.columns[name]

    def tensor(self, name: str) -> np.ndarray:
        return unflatten(self.column(name), self.dims)


def record_from_samples(
    u: np.ndarray,
    xi: np.ndarray,
    metadata: dict[str, Any],
    a_eps: np.ndarray | None = None,
) -> DatasetRecord:
    """Stack per-sample tensors [N, T, X(, Y)] into a columnar record.

    a_eps, when given, is the per-time scalar counterterm [T]; it is
    broadcast over samples and space so all columns share one length.
    """
    u = np.asarray(u)
    xi = np.asarray(xi)
    if u.shape != xi.shape:
        raise InvalidArgumentError(f"u {u.shape} and xi {xi.shape} differ")
    if u.ndim not in (3, 4):
        raise InvalidArgumentError(f"need [N, T, X(, Y)] tensors, got {u.shape}")
    dims = u.shape
    columns = {
        "xi": flatten(xi.astype(np.float32)),
        "u": flatten(u.astype(np.float32)),
    }
    if a_eps is not None:
        a_eps = np.asarray(a_eps, dtype=np.float32)
        if a_eps.shape != (dims[1],):
            raise InvalidArgumentError(
                f"a_eps must have one value per time step {dims[1]}, got {a_eps.shape}"
            )
        shaped = a_eps.reshape((1, dims[1]) + (1,) * (len(dims) - 2))
        columns["a_eps"] = flatten(np.broadcast_to(shaped, dims))
    return DatasetRecord(columns=columns, dims=dims, metadata=dict(metadata))


def _sigma_tag(sigma: float) -> str:
    return format(sigma, "g").replace(".", "")


def file_name(metadata: dict[str, Any]) -> str:
    """Dataset file name from its metadata.

    1-d equations and the vorticity model follow
    {Name}-{variant-}{task}-{degree}-{samples}.parquet with variant tags
    for the coupling (01/1) or the noise covariance (cyl/Q); the
    renormalization benchmark follows the published loader string
    Phi42+_{method}_{task}_eps_{degree}_{samples}.parquet.
    """
    equation = metadata["equation"]
    task = metadata["task"]
    degree = int(metadata["degree"])
    n = int(metadata["n_samples"])
    if task not in TASKS:
        raise InvalidArgumentError(f"unknown task {task!r}")
    if equation == "phi42":
        method = metadata["method"]
        if method not in ("reno", "expl"):
            raise InvalidArgumentError(f"unknown phi42 method tag {method!r}")
        return f"Phi42+_{method}_{task}_eps_{degree}_{n}.parquet"
    name = _NAME_1D.get(equation)
    if name is None:
        raise InvalidArgumentError(f"unknown equation {equation!r}")
    parts = [name]
    if equation == "ginzburg-landau":
        parts.append(_sigma_tag(float(metadata["sigma"])))
    elif equation == "kdv":
        spectrum = metadata.get("spectrum", "identity")
        parts.append("cyl" if spectrum == "identity" else "Q")
    parts += [task, str(degree), str(n)]
    return "-".join(parts) + ".parquet"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def sidecar_path(parquet_path: pathlib.Path) -> pathlib.Path:
    return parquet_path.with_suffix(".meta.json")


def write_parquet(
    record: DatasetRecord,
    directory: str | pathlib.Path | None = None,
    path: str | pathlib.Path | None = None,
    timestamp: str | None = None,
) -> pathlib.Path:
    """Write the record and its sidecar; returns the parquet path.

    The file name is derived from the metadata unless an explicit path is
    given.  The parquet bytes are a pure function of the record; the
    timestamp (if any) goes only into the sidecar JSON.
    """
    record.validate()
    if path is None:
        directory = pathlib.Path(directory or ".")
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / file_name(
            {**record.metadata, "n_samples": record.n_samples}
        )
    path = pathlib.Path(path)

    payload = {
        "format_version": FORMAT_VERSION,
        "scheme_version": SCHEME_VERSION,
        "dims": list(record.dims),
        "columns": list(record.columns),
        "metadata": _jsonable(record.metadata),
    }
    arrays = {
        name: pa.array(np.asarray(col, dtype=np.float32), type=pa.float32())
        for name, col in record.columns.items()
    }
    table = pa.table(arrays).replace_schema_metadata(
        {_METADATA_KEY: json.dumps(payload, sort_keys=True).encode()}
    )
    try:
        pq.write_table(table, path)
    except OSError as exc:
        raise SchemaError(f"cannot write dataset to {path}: {exc}") from exc

    sidecar = dict(payload)
    if timestamp is not None:
        sidecar["written_at"] = timestamp
    sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def read_parquet(path: str | pathlib.Path) -> DatasetRecord:
    path = pathlib.Path(path)
    try:
        table = pq.read_table(path)
    except (OSError, pa.ArrowInvalid) as exc:
        raise SchemaError(f"cannot read dataset at {path}: {exc}") from exc
    meta = (table.schema.metadata or {}).get(_METADATA_KEY)
    if meta is None:
        raise SchemaError(f"{path} is not a dataset written by this package")
    try:
        payload = json.loads(meta)
        dims = tuple(payload["dims"])
        names = payload["columns"]
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaError(f"corrupt metadata in {path}: {exc}") from exc
    if payload.get("format_version") != FORMAT_VERSION:
        raise SchemaError(
            f"{path}: format version {payload.get('format_version')!r} unsupported"
        )
    missing = [n for n in names if n not in table.column_names]
    if missing:
        raise SchemaError(f"{path}: columns {missing} listed but absent")
    columns = {
        name: table.column(name).to_numpy(zero_copy_only=False).astype(np.float32)
        for name in names
    }
    record = DatasetRecord(columns=columns, dims=dims, metadata=payload["metadata"])
    record.metadata["scheme_version"] = payload["scheme_version"]
    return record


def split_indices(
    n: int, seed: int, fractions: tuple[float, float, float] = SPLIT_FRACTIONS
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic train/valid/test permutation split (70/15/15 default)."""
    if n < 1:
        raise InvalidArgumentError("need at least one sample to split")
    if len(fractions) != 3 or abs(sum(fractions) - 1.0) > 1e-9 or min(fractions) < 0:
        raise InvalidArgumentError(f"fractions must be 3 nonnegative shares: {fractions}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(n * fractions[0])
    n_valid = int(n * fractions[1])
    return (
        perm[:n_train],
        perm[n_train : n_train + n_valid],
        perm[n_train + n_valid :],
    )
