"""
Minimal reverse-mode differentiation for the desk-scale classifiers
Exposes loss values and gradients with respect to parameters and input series
"""

from .errors import (
    DiffcoreError,
    InvalidStepError,
    LabelRangeError,
    MissingForwardCacheError,
    NonScalarOutputError,
    NumericalError,
    ShapeMismatchError,
    UnboundLeafError,
)
from .graph import (
    Graph,
    GraphBuilder,
    Node,
    Tensor,
    as_tensor,
    backpropagate,
    check_shapes_match,
    evaluate,
    finite_difference_gradient,
)

__all__ = [
    'Graph', 'GraphBuilder', 'Node', 'Tensor', 'as_tensor', 'evaluate', 'backpropagate',
    'finite_difference_gradient', 'check_shapes_match',
    'DiffcoreError', 'ShapeMismatchError', 'UnboundLeafError', 'LabelRangeError', 'NumericalError',
    'NonScalarOutputError', 'MissingForwardCacheError', 'InvalidStepError',
]
