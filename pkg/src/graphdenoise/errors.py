"""Exception types shared across the package."""


class GraphDenoiseError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(GraphDenoiseError, ValueError):
    """A caller-supplied parameter is outside its documented range."""


class InvalidGraphError(GraphDenoiseError, ValueError):
    """A graph violates a structural requirement (self-loop, duplicate
    edge, negative cost, or an index out of range)."""


class SingularMatrixError(GraphDenoiseError, ArithmeticError):
    """A direct linear solve hit a pivot too small to trust."""


class ConvergenceFailureError(GraphDenoiseError, RuntimeError):
    """An iterative solver exhausted its iteration cap before reaching
    the requested tolerance.  The message reports the worst residual."""


class InsufficientDataError(GraphDenoiseError, ValueError):
    """Too little data survived to carry out the requested operation."""


class UndefinedSimilarityError(GraphDenoiseError, ValueError):
    """A similarity score is undefined because an input has zero norm."""
