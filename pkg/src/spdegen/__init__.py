"""spdegen: reproducible dataset generation for stochastic PDE learning tasks."""

from .dataset import (
    DatasetRecord,
    coarsen_noise,
    downsample,
    file_name,
    flatten,
    read_parquet,
    record_from_samples,
    split_indices,
    training_view,
    unflatten,
    write_parquet,
)
from .errors import (
    ConfigError,
    DivergenceError,
    InvalidArgumentError,
    ResourceLimitError,
    SchemaError,
    SpdegenError,
    UndefinedMetricError,
)
from .initcond import InitSpec, InitialData, make_initial
from .metrics import (
    ErrorReport,
    TimingReport,
    high_freq_energy_fraction,
    relative_l2,
    time_callable,
    time_solver,
)
from .noise import (
    BasisSpec,
    CYLINDRICAL,
    NoisePath,
    SpectrumSpec,
    brownian_mode_increments,
    eigenvalues,
    eval_basis,
    increments_to_white_noise,
    mode_indices,
    sample_path,
)
from .renorm import (
    RenormBundle,
    renorm_bundle,
    renorm_constant,
    renorm_constant_scalar,
    solve_phi42_renormalized,
    stochastic_convolution,
    wick_powers,
)
from .solvers import (
    EQUATIONS,
    EXPORT_STRIDES,
    GL_SIGMAS,
    PRESET_DEGREES,
    SAMPLE_COUNT,
    SOLVERS,
    EquationConfig,
    Trajectory,
    deterministic,
    preset,
    solve_ginzburg_landau,
    solve_kdv,
    solve_nse_vorticity,
    solve_phi42_explicit,
    solve_wave,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "CYLINDRICAL",
    "ConfigError",
    "DatasetRecord",
    "DivergenceError",
    "EQUATIONS",
    "EXPORT_STRIDES",
    "EquationConfig",
    "ErrorReport",
    "GL_SIGMAS",
    "InitSpec",
    "InitialData",
    "InvalidArgumentError",
    "NoisePath",
    "PRESET_DEGREES",
    "RenormBundle",
    "ResourceLimitError",
    "SAMPLE_COUNT",
    "SOLVERS",
    "SchemaError",
    "SpdegenError",
    "SpectrumSpec",
    "TimingReport",
    "Trajectory",
    "UndefinedMetricError",
    "brownian_mode_increments",
    "coarsen_noise",
    "deterministic",
    "downsample",
    "eigenvalues",
    "eval_basis",
    "file_name",
    "flatten",
    "high_freq_energy_fraction",
    "increments_to_white_noise",
    "make_initial",
    "mode_indices",
    "preset",
    "read_parquet",
    "record_from_samples",
    "relative_l2",
    "renorm_bundle",
    "renorm_constant",
    "renorm_constant_scalar",
    "sample_path",
    "solve_ginzburg_landau",
    "solve_kdv",
    "solve_nse_vorticity",
    "solve_phi42_explicit",
    "solve_phi42_renormalized",
    "solve_wave",
    "split_indices",
    "stochastic_convolution",
    "time_callable",
    "time_solver",
    "training_view",
    "unflatten",
    "wick_powers",
    "write_parquet",
    "__version__",
]
