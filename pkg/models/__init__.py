"""
Desk-scale classifiers: MLP, residual 1-D CNN and a gated recurrent proxy
"""

from data.series import EmptyDatasetError
from diffcore import LabelRangeError, ShapeMismatchError

from .classifier import EpochRecord, TrainedClassifier, build
from .persistence import ParameterFileError, load_parameters, save_parameters
from .spec import ModelFamily, ModelSpec, TrainConfig
from .training import fit

__all__ = [
    'ModelFamily', 'ModelSpec', 'TrainConfig', 'TrainedClassifier', 'EpochRecord',
    'build', 'fit', 'save_parameters', 'load_parameters',
    'ParameterFileError', 'LabelRangeError', 'EmptyDatasetError', 'ShapeMismatchError',
]
