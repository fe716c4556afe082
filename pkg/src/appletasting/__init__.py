"""Bayesian policies for logistic contextual apple tasting."""
from .core import Feedback, GameSpec, expected_loss, feedback, optimal_action, realized_loss, sigmoid
from .envs import ContextProcess, Environment, builtin_problem, make_problem, sample_class, sample_context
from .inference import Dataset, GaussianPrior, fit_penalized_mle, gibbs, project_to_ellipsoid
from .pg import pg_series_oracle, sample_pg, sample_pg_many

__version__ = "0.1.0"
