"""Exception hierarchy shared across the package."""


class LipInterpError(Exception):
    """Base class for all package errors."""


class InputError(LipInterpError, ValueError):
    """An argument is empty or malformed."""


class DimensionError(InputError):
    """Input vectors have the wrong length."""


class EmptyDataError(LipInterpError, ValueError):
    """A query was made against an empty sample set."""


class ConfigurationError(LipInterpError, ValueError):
    """A model or study is missing a required parameter or has an invalid one."""


class CapabilityError(LipInterpError, NotImplementedError):
    """The requested operation is not available for this model kind."""


class DegenerateDataError(LipInterpError, ValueError):
    """Data cannot support the requested fit (e.g. nonpositive values on a log scale)."""
