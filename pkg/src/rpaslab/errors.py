"""Exception types shared across the package."""


class ConfigError(Exception):
    """A configuration file or parameter set failed validation."""


class ConvergenceError(RuntimeError):
    """An iterative solve (trim root-find, Riccati, quadrature) did not converge."""
