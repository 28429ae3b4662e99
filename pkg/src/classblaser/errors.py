"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad user input: parameters, config file keys, CLI flags."""


class NumericalError(RuntimeError):
    """Integration failure: non-finite values, cutoff exhaustion, lost positivity."""


class NoSignalError(RuntimeError):
    """An intensity-normalized quantity was requested for a field with no photons."""
