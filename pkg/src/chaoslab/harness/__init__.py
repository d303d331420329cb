"""Configuration, execution and persistence of experiments."""
from ..rng import seed_split
from .config import ConfigError, ExperimentConfig, parse_config, serialize, validate
from .runner import EXIT_ERROR, RunResult, execute, run, run_safely

__all__ = [
    "ConfigError", "EXIT_ERROR", "ExperimentConfig", "RunResult", "execute", "parse_config",
    "run", "run_safely", "seed_split", "serialize", "validate",
]
