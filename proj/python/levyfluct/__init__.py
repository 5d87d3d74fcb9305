from ._core import (
    ConfigError,
    InvariantError,
    NumericalError,
    PrerequisiteError,
    density,
    estimate_dstar,
    git_blob_sha1,
    levy_density,
    pipeline,
    simulate_terminal,
    time_grid,
)

__all__ = [
    "ConfigError",
    "InvariantError",
    "NumericalError",
    "PrerequisiteError",
    "density",
    "estimate_dstar",
    "git_blob_sha1",
    "levy_density",
    "pipeline",
    "simulate_terminal",
    "time_grid",
]
