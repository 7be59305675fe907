"""Exception hierarchy shared by all modules.

ValidationError and its subclasses map to CLI exit code 2, I/O problems
(OSError) to 4, everything else raised from here to 3.
"""


class OceanscanError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(OceanscanError, ValueError):
    """Invalid parameters, configuration, or operation inputs."""


class InvalidParameterError(ValidationError):
    pass


class InvalidInputError(ValidationError):
    pass


class OutOfDomainError(ValidationError):
    """Requested coordinates fall outside the grid."""


class BoundsError(ValidationError, IndexError):
    """Index (e.g. a time step) outside the valid range."""


class VariableNotFoundError(OceanscanError, KeyError):
    """A named variable does not exist in the dataset."""


class FormatError(OceanscanError):
    """Malformed or unsupported input file."""


class InfeasiblePartitionError(ValidationError):
    """Partition request cannot be satisfied (e.g. more slabs than levels)."""


class DegenerateWeightsError(ValidationError):
    """Seed weighting field carries no positive mass."""


class InvalidSeedError(ValidationError):
    """Seed point on land or outside the domain."""


class DegenerateEddyError(OceanscanError):
    """No radial axis admits a closed-loop streamline for a candidate core."""
