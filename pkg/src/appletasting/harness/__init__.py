from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .episode import Metrics, Stream, Trajectory, compute_metrics, generate_stream, run_episode
from .experiment import Summary, read_rounds_csv, run_experiment, run_replication, summarize, sweep

__all__ = [
    "ConfigError", "ExperimentConfig", "Metrics", "Stream", "Summary", "Trajectory", "compute_metrics",
    "generate_stream", "load_config", "parse_config", "read_rounds_csv", "run_episode", "run_experiment",
    "run_replication", "summarize", "sweep",
]
