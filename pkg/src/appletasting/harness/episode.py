"""Episode loop, trajectories and per-episode metrics."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import expected_loss, feedback, optimal_action_from_prob, sigmoid
from ..envs import Environment, sample_class, sample_context
from ..policies import Policy


@dataclass(frozen=True)
class Stream:
    """Contexts and classes for one replication, shared by every policy."""

    X: np.ndarray  # (T, d)
    classes: np.ndarray  # (T,) int
    probs: np.ndarray  # (T,) sigma(x_t' theta*)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.classes).tobytes())
        return h.hexdigest()


def generate_stream(env: Environment, rng: np.random.Generator) -> Stream:
    T, d = env.game.T, env.game.d
    X = np.empty((T, d))
    classes = np.empty(T, dtype=np.int64)
    for t in range(1, T + 1):
        x = sample_context(env, t, rng)
        X[t - 1] = x
        classes[t - 1] = sample_class(env, x, rng)
    return Stream(X, classes, sigmoid(X @ env.theta_star))


@dataclass
class Trajectory:
    actions: np.ndarray
    true_class: np.ndarray
    class1_prob: np.ndarray
    optimal: np.ndarray
    expected_regret: np.ndarray

    @property
    def T(self) -> int:
        return len(self.actions)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.T + 1)

    @property
    def cum_regret(self) -> np.ndarray:
        return np.cumsum(self.expected_regret)


class EpisodeError(RuntimeError):
    pass


def run_episode(env: Environment, policy: Policy, seed=None, stream: Optional[Stream] = None) -> Trajectory:
    """Play ``policy`` for T rounds; regret is the expected-loss gap to the optimal action.

    Either ``stream`` (pre-drawn contexts and classes) or ``seed`` must be given.
    The policy is expected to be freshly reset.
    """
    if stream is None:
        if seed is None:
            raise ValueError("need a seed or a pre-drawn stream")
        stream = generate_stream(env, np.random.default_rng(seed))
    game = env.game
    T = game.T
    actions = np.empty(T, dtype=np.int64)
    optimal = np.empty(T, dtype=np.int64)
    regret = np.empty(T)
    for i in range(T):
        x, c, p = stream.X[i], int(stream.classes[i]), float(stream.probs[i])
        try:
            a = int(policy.select(x))
            policy.update(x, a, feedback(a, c, game))
        except Exception as exc:
            raise EpisodeError(f"policy {policy.name!r} failed at round {i + 1}: {exc}") from exc
        a_star = optimal_action_from_prob(p, game)
        actions[i] = a
        optimal[i] = a_star
        regret[i] = max(0.0, expected_loss(a, p, game) - expected_loss(a_star, p, game))
    return Trajectory(actions, stream.classes.copy(), stream.probs.copy(), optimal, regret)


@dataclass(frozen=True)
class Metrics:
    precision: Optional[float]
    recall: Optional[float]


def compute_metrics(traj: Trajectory, reference: str = "true_class") -> Metrics:
    """Precision and recall of the action-1 labels.

    ``reference="true_class"`` scores against the realised classes C_t;
    ``reference="optimal"`` scores against the optimal action under theta*.
    Empty denominators give ``None``.
    """
    if traj.T < 1:
        raise ValueError("trajectory is empty")
    if reference == "true_class":
        truth = traj.true_class == 1
    elif reference == "optimal":
        truth = traj.optimal == 1
    else:
        raise ValueError(f"unknown reference {reference!r}")
    labelled = traj.actions == 1
    hits = int(np.sum(labelled & truth))
    n_lab, n_true = int(labelled.sum()), int(truth.sum())
    return Metrics(hits / n_lab if n_lab else None, hits / n_true if n_true else None)
