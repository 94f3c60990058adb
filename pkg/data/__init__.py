"""
Series datasets: UCR TSV files, synthetic generators and normalization
"""

from .normalize import STD_FLOOR, apply_normalization, compute_stats, zscore_normalize
from .series import EmptyDatasetError, LabeledSeriesSet, NormalizationStats, split_holdout
from .synthetic import SyntheticKind, SyntheticSpec, class_templates, generate_synthetic
from .ucr import DatasetFormatError, load_ucr_tsv, save_ucr_tsv

__all__ = [
    'LabeledSeriesSet', 'NormalizationStats', 'EmptyDatasetError', 'split_holdout',
    'SyntheticKind', 'SyntheticSpec', 'class_templates', 'generate_synthetic',
    'DatasetFormatError', 'load_ucr_tsv', 'save_ucr_tsv',
    'STD_FLOOR', 'compute_stats', 'apply_normalization', 'zscore_normalize',
]
