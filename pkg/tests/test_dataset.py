"""Dataset packaging: flatten/round-trip, downsampling, Parquet I/O, names."""

import json

import numpy as np
import pytest

from spdegen.dataset import (
    DatasetRecord,
    coarsen_noise,
    downsample,
    file_name,
    flatten,
    read_parquet,
    record_from_samples,
    sidecar_path,
    split_indices,
    training_view,
    unflatten,
    write_parquet,
)
from spdegen.errors import InvalidArgumentError, SchemaError
from spdegen.noise import CYLINDRICAL, BasisSpec, sample_path
from spdegen.solvers import Trajectory, preset


def _toy_trajectory(n_saved=10, grid=(8,), dt=0.1):
    cfg = preset("wave", degree=32)
    values = np.arange(n_saved * int(np.prod(grid)), dtype=float).reshape(
        (n_saved,) + grid
    )
    times = np.arange(n_saved) * dt
    return Trajectory(values, times, cfg, seed=7)


class TestFlatten:
    def test_row_major_order(self):
        t = np.array([[[1.0, 2.0], [3.0, 4.0]], [[5.0, 6.0], [7.0, 8.0]]])
        assert flatten(t).tolist() == [1, 2, 3, 4, 5, 6, 7, 8]

    def test_round_trip_fuzz(self):
        # 1000 random shapes; unflatten(flatten(x)) must be bitwise x.
        rng = np.random.default_rng(31)
        for _ in range(1000):
            ndim = rng.integers(3, 5)
            shape = tuple(int(s) for s in rng.integers(1, 6, size=ndim))
            x = rng.standard_normal(shape)
            back = unflatten(flatten(x), shape)
            assert back.shape == x.shape
            assert np.array_equal(back, x)

    def test_unflatten_length_mismatch(self):
        with pytest.raises(InvalidArgumentError, match="does not fill"):
            unflatten(np.zeros(7), (2, 2, 2))


class TestDownsample:
    def test_keeps_index_zero(self):
        traj = _toy_trajectory(n_saved=10, grid=(8,))
        out = downsample(traj, t_stride=5, x_stride=4)
        assert out.values.shape == (2, 2)
        assert np.array_equal(out.values, traj.values[::5, ::4])
        assert np.array_equal(out.times, traj.times[::5])
        assert out.values[0, 0] == traj.values[0, 0]

    def test_identity_strides(self):
        traj = _toy_trajectory()
        out = downsample(traj, 1, 1)
        assert np.array_equal(out.values, traj.values)
        assert out.seed == traj.seed

    def test_strides_both_spatial_axes(self):
        traj = _toy_trajectory(n_saved=4, grid=(8, 8))
        out = downsample(traj, t_stride=2, x_stride=4)
        assert out.values.shape == (2, 2, 2)
        assert np.array_equal(out.values, traj.values[::2, ::4, ::4])

    def test_inclusive_count_retains_final_state(self):
        # 11 saved states with stride 5 keeps indices 0, 5, 10, exactly what
        # a solver run saved with stride 5 would store
        traj = _toy_trajectory(n_saved=11, grid=(8,))
        out = downsample(traj, t_stride=5, x_stride=1)
        assert out.values.shape[0] == 3
        assert np.array_equal(out.values[-1], traj.values[-1])

    def test_non_divisible_strides_rejected(self):
        traj = _toy_trajectory(n_saved=10, grid=(8,))
        with pytest.raises(InvalidArgumentError, match="t_stride"):
            downsample(traj, t_stride=4, x_stride=1)
        with pytest.raises(InvalidArgumentError, match="x_stride"):
            downsample(traj, t_stride=1, x_stride=3)

    def test_training_view_drops_final_state(self):
        traj = _toy_trajectory(n_saved=11)
        view = training_view(traj)
        assert view.n_saved == 10
        assert np.array_equal(view.values, traj.values[:-1])
        assert np.array_equal(view.times, traj.times[:-1])


class TestNoiseCoarsening:
    def test_window_sums_match_manual(self):
        basis = BasisSpec("sine1d", degree=8, lengths=(1.0,))
        path = sample_path(basis, CYLINDRICAL, 16, n_steps=20, dt=0.01, seed=3)
        xi = coarsen_noise(path, t_stride=5, x_stride=4)
        manual = path.increments[:, ::4].reshape(4, 5, 4).sum(axis=1) / 0.05
        assert xi.shape == (4, 4)
        assert np.array_equal(xi, manual)

    def test_identity_coarsening_is_white_noise(self):
        basis = BasisSpec("sine1d", degree=8, lengths=(1.0,))
        path = sample_path(basis, CYLINDRICAL, 16, n_steps=4, dt=0.25, seed=3)
        xi = coarsen_noise(path, 1, 1)
        assert np.array_equal(xi, path.increments / 0.25)

    def test_non_divisible_rejected(self):
        basis = BasisSpec("sine1d", degree=8, lengths=(1.0,))
        path = sample_path(basis, CYLINDRICAL, 16, n_steps=10, dt=0.01, seed=3)
        with pytest.raises(InvalidArgumentError, match="t_stride"):
            coarsen_noise(path, t_stride=3, x_stride=1)
        with pytest.raises(InvalidArgumentError, match="x_stride"):
            coarsen_noise(path, t_stride=1, x_stride=5)


class TestRecord:
    def test_column_length_enforced(self):
        with pytest.raises(SchemaError, match="length"):
            DatasetRecord(
                columns={"u": np.zeros(7, dtype=np.float32)}, dims=(2, 2, 2)
            )

    def test_from_samples_builds_float32_columns(self):
        rng = np.random.default_rng(0)
        u = rng.standard_normal((3, 4, 5))
        xi = rng.standard_normal((3, 4, 5))
        rec = record_from_samples(u, xi, metadata={"equation": "wave"})
        assert rec.dims == (3, 4, 5)
        assert set(rec.columns) == {"xi", "u"}
        assert rec.column("u").dtype == np.float32
        assert np.array_equal(rec.tensor("u"), u.astype(np.float32))

    def test_a_eps_broadcasts_over_samples_and_space(self):
        rng = np.random.default_rng(1)
        u = rng.standard_normal((2, 3, 4, 4))
        xi = rng.standard_normal((2, 3, 4, 4))
        a = np.array([0.0, 0.5, 0.75])
        rec = record_from_samples(u, xi, metadata={}, a_eps=a)
        tensor = rec.tensor("a_eps")
        assert tensor.shape == (2, 3, 4, 4)
        for t in range(3):
            assert np.all(tensor[:, t] == np.float32(a[t]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidArgumentError, match="differ"):
            record_from_samples(np.zeros((2, 3, 4)), np.zeros((2, 3, 5)), {})
        with pytest.raises(InvalidArgumentError, match="per time step"):
            record_from_samples(
                np.zeros((2, 3, 4)), np.zeros((2, 3, 4)), {}, a_eps=np.zeros(4)
            )

    def test_missing_column_lookup(self):
        rec = record_from_samples(np.zeros((1, 2, 2)), np.zeros((1, 2, 2)), {})
        with pytest.raises(SchemaError, match="no column"):
            rec.column("u0")


class TestParquetRoundTrip:
    def _record(self):
        rng = np.random.default_rng(5)
        u = rng.standard_normal((2, 3, 4))
        xi = rng.standard_normal((2, 3, 4))
        meta = {
            "equation": "ginzburg-landau",
            "task": "xi",
            "degree": 32,
            "sigma": 1.0,
            "kappa": 0.0,
            "method": "expl",
            "master_seed": 99,
            "sample_seeds": [[1, 2], [3, 4]],
            "split_seed": 99,
            "failed_seeds": [],
        }
        return record_from_samples(u, xi, metadata=meta)

    def test_bitwise_round_trip(self, tmp_path):
        rec = self._record()
        path = write_parquet(rec, directory=tmp_path)
        back = read_parquet(path)
        assert back.dims == rec.dims
        for name in rec.columns:
            assert np.array_equal(back.column(name), rec.column(name))
        assert back.metadata["degree"] == 32
        assert back.metadata["sample_seeds"] == [[1, 2], [3, 4]]
        assert back.metadata["scheme_version"] == "spdegen-1"

    def test_auto_name_and_sidecar(self, tmp_path):
        rec = self._record()
        path = write_parquet(rec, directory=tmp_path, timestamp="2026-08-16T00:00:00Z")
        assert path.name == "GinzburgLandau-1-xi-32-2.parquet"
        side = sidecar_path(path)
        assert side.name == "GinzburgLandau-1-xi-32-2.meta.json"
        payload = json.loads(side.read_text())
        assert payload["written_at"] == "2026-08-16T00:00:00Z"
        assert payload["dims"] == [2, 3, 4]

    def test_bytes_deterministic_without_timestamp_in_parquet(self, tmp_path):
        rec = self._record()
        p1 = write_parquet(rec, path=tmp_path / "a.parquet", timestamp="t1")
        p2 = write_parquet(rec, path=tmp_path / "b.parquet", timestamp="t2")
        assert p1.read_bytes() == p2.read_bytes()

    def test_foreign_parquet_rejected(self, tmp_path):
        import pyarrow as pa
        import pyarrow.parquet as pq

        path = tmp_path / "foreign.parquet"
        pq.write_table(pa.table({"x": [1.0, 2.0]}), path)
        with pytest.raises(SchemaError, match="not a dataset"):
            read_parquet(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(SchemaError, match="cannot read"):
            read_parquet(tmp_path / "absent.parquet")


class TestFileNames:
    def test_phi42_matches_published_loader_string(self):
        meta = {
            "equation": "phi42",
            "task": "xi",
            "degree": 2,
            "n_samples": 1200,
            "method": "expl",
        }
        assert file_name(meta) == "Phi42+_expl_xi_eps_2_1200.parquet"
        meta["method"] = "reno"
        meta["task"] = "u0_xi"
        assert file_name(meta) == "Phi42+_reno_u0_xi_eps_2_1200.parquet"

    def test_coupling_and_covariance_tags(self):
        base = {"task": "xi", "degree": 128, "n_samples": 1200}
        assert (
            file_name({**base, "equation": "ginzburg-landau", "sigma": 0.1})
            == "GinzburgLandau-01-xi-128-1200.parquet"
        )
        assert (
            file_name({**base, "equation": "ginzburg-landau", "sigma": 1.0})
            == "GinzburgLandau-1-xi-128-1200.parquet"
        )
        assert (
            file_name({**base, "equation": "kdv", "spectrum": "identity"})
            == "KdV-cyl-xi-128-1200.parquet"
        )
        assert (
            file_name({**base, "equation": "kdv", "spectrum": "polydecay1d"})
            == "KdV-Q-xi-128-1200.parquet"
        )
        assert file_name({**base, "equation": "wave"}) == "Wave-xi-128-1200.parquet"
        assert (
            file_name({**base, "equation": "nse-vorticity", "task": "u0_xi"})
            == "NSE-u0_xi-128-1200.parquet"
        )

    def test_unknown_task_or_equation(self):
        with pytest.raises(InvalidArgumentError, match="task"):
            file_name({"equation": "wave", "task": "w", "degree": 2, "n_samples": 2})
        with pytest.raises(InvalidArgumentError, match="equation"):
            file_name({"equation": "heat", "task": "xi", "degree": 2, "n_samples": 2})


class TestSplit:
    def test_sizes_and_cover(self):
        train, valid, test = split_indices(1200, seed=42)
        assert (len(train), len(valid), len(test)) == (840, 180, 180)
        merged = np.sort(np.concatenate([train, valid, test]))
        assert np.array_equal(merged, np.arange(1200))

    def test_deterministic_in_seed(self):
        a = split_indices(100, seed=7)
        b = split_indices(100, seed=7)
        c = split_indices(100, seed=8)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)
        assert not np.array_equal(a[0], c[0])

    def test_validation(self):
        with pytest.raises(InvalidArgumentError, match="at least one"):
            split_indices(0, seed=1)
        with pytest.raises(InvalidArgumentError, match="shares"):
            split_indices(10, seed=1, fractions=(0.5, 0.5, 0.5))
