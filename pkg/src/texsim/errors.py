"""Exception hierarchy shared by all texsim modules."""


class TexsimError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(TexsimError, ValueError):
    """Image or array shape does not satisfy an operation's requirements."""


class ParameterError(TexsimError, ValueError):
    """Transform parameters are invalid for the requested image size."""


class StructureError(TexsimError, ValueError):
    """A curvelet decomposition does not match its parameters."""


class NumericError(TexsimError, ArithmeticError):
    """Non-finite input or a numerical failure."""


class ZeroSpectrumError(NumericError):
    """A singular value vector is identically zero."""


class IncompatibleError(TexsimError, ValueError):
    """Two objects cannot be compared (different sizes, layouts or parameters)."""


class ConfigurationError(TexsimError, ValueError):
    """Dataset or experiment configuration is unusable."""


class DegenerateLabelsError(ConfigurationError):
    """ROC analysis needs both positive and negative pairs."""
