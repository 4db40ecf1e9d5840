"""Command-line front end for simulations, sweeps and figure bundles."""
from .config import ConfigError, ExperimentConfig, SweepAxis, build_config, parse_grid, read_config_file
from .main import main
from .runners import SweepRecord, analytics_report, run_reproduce, run_simulate, run_sweep

__all__ = ["ConfigError", "ExperimentConfig", "SweepAxis", "SweepRecord", "analytics_report",
           "build_config", "main", "parse_grid", "read_config_file", "run_reproduce",
           "run_simulate", "run_sweep"]
