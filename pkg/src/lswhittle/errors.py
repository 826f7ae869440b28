"""Exception taxonomy shared across the package.

The CLI maps these onto its exit-code contract, so raising the right type
matters more than the message text.
"""


class LswhittleError(Exception):
    """Base class for package-specific errors."""


class ConfigError(LswhittleError):
    """Malformed configuration input (unknown keys, bad values, missing files)."""


class InfeasibleParameterError(LswhittleError):
    """Parameter vector violates the model's feasibility constraints."""


class PlanError(LswhittleError):
    """Invalid block segmentation plan (divisibility, sizes, empty grids)."""


class NotPositiveDefiniteError(LswhittleError):
    """A matrix that must be symmetric positive definite is not."""
