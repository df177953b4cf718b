"""bootchain: iterated-bootstrap bias reduction for smooth functionals of
high-dimensional models, with Gaussian-surrogate chains and empirical
normal-approximation diagnostics."""

from . import bootstrap, cli, config, core, distances, experiments, functionals, gaussian, models

__version__ = "0.1.0"

__all__ = [
    "bootstrap",
    "cli",
    "config",
    "core",
    "distances",
    "experiments",
    "functionals",
    "gaussian",
    "models",
    "__version__",
]
