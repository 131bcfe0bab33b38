from .config import (
    METHODS,
    ConfigError,
    EpochBudget,
    ExperimentConfig,
    MethodConfig,
    ReportConfig,
    display_name,
    family,
    load_config,
    parse_config,
)
from .report import ReportError, collect, f1_grid, rank_table, render, write_report
from .run import RunError, RunManifest, load_manifest, load_run, read_results, resolve_dataset, run, score_fields
from .selftest import SUITES, enumerate_info_nce, enumerate_signed_rank_pvalue, run_selftest
from .trials import TrialResult, memory_estimate, run_trial, trial_seed

__all__ = [name for name in dir() if not name.startswith("_")]
