"""Exception types shared across the package."""


class StripflowError(Exception):
    """Base class for package errors."""


class InfeasibleScenario(StripflowError):
    """No strip placement satisfying the scenario constraints was found."""


class DegenerateCrossing(StripflowError):
    """A segment endpoint or crossing lies on a cut line within tolerance."""


class ValidityWindowExceeded(StripflowError):
    """The step length exceeds the scenario's overlap-stability window."""


class ConfigError(StripflowError):
    """An experiment configuration failed to parse or validate."""
