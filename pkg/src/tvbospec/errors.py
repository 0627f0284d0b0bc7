"""Exception types shared across the package."""


class TvbospecError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(TvbospecError):
    """A point's spatial dimension does not match the kernel's."""


class WrongClass(TvbospecError):
    """A kernel of the wrong spectral class was passed to an operation."""


class ToleranceUnreachable(TvbospecError):
    """The requested approximation tolerance cannot be met."""


class ConvergenceFailure(TvbospecError):
    """The eigensolver failed to converge."""


class ScaleMismatch(TvbospecError):
    """A spectrum was supplied in the wrong scale (matrix vs operator)."""


class MissingEigenvectors(TvbospecError):
    """The operation needs a spectrum that carries eigenvectors."""


class SingularSystem(TvbospecError):
    """The regularized Gram matrix could not be factorized."""


class CapExceeded(TvbospecError):
    """A requested grid exceeds the configured sampling cap."""


class InsufficientData(TvbospecError):
    """Not enough observations for the requested quantity."""


class InvalidConfig(TvbospecError):
    """An experiment configuration is structurally invalid."""


class ConfigParseError(InvalidConfig):
    """A configuration file could not be parsed; carries location info."""
