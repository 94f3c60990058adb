"""
Experiment runner: configuration, pipeline, grid search, plots and CLI
"""

from .config import ConfigError, ExperimentConfig, load_config, parse_config_text, resolve_output_dir
from .grid import expand_grid, grid_search
from .pipeline import Combination, PipelineStageError, prepare_data, run_combinations, run_pipeline
from .plots import emit_plot
from .records import CombinationResult, RunRecord

__all__ = [
    'ConfigError', 'ExperimentConfig', 'load_config', 'parse_config_text', 'resolve_output_dir',
    'expand_grid', 'grid_search', 'Combination', 'PipelineStageError', 'prepare_data',
    'run_combinations', 'run_pipeline', 'emit_plot', 'CombinationResult', 'RunRecord',
]
