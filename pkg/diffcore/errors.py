"""
Errors raised while building, evaluating or differentiating a graph
"""


class DiffcoreError(Exception):
    """Base class for graph errors"""


class ShapeMismatchError(DiffcoreError, ValueError):
    """Operand shapes are inconsistent with an op signature"""


class UnboundLeafError(DiffcoreError, ValueError):
    """A leaf of the graph has no tensor bound to it"""


class LabelRangeError(DiffcoreError, ValueError):
    """Integer labels fall outside [0, n_classes)"""


class NumericalError(DiffcoreError, RuntimeError):
    """A forward value became NaN or infinite"""


class NonScalarOutputError(DiffcoreError, ValueError):
    """Differentiation requested for a graph whose output is not a scalar"""


class MissingForwardCacheError(DiffcoreError, RuntimeError):
    """backpropagate was called before evaluate on this thread"""


class InvalidStepError(DiffcoreError, ValueError):
    """Finite-difference step is not positive"""
