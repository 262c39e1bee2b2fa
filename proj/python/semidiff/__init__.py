"""Python bindings for the semidiff C++ core."""

from ._semidiff import (
    ConditionalTask,
    ConfigError,
    ExperimentConfig,
    Scalarization,
    __version__,
    alpha,
    check_axioms,
    load_config,
    parse_config,
    run_experiment,
    sigma2,
)

__all__ = [
    "ConditionalTask",
    "ConfigError",
    "ExperimentConfig",
    "Scalarization",
    "__version__",
    "alpha",
    "check_axioms",
    "load_config",
    "parse_config",
    "run_experiment",
    "sigma2",
]
