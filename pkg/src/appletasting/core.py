"""Game mathematics for logistic contextual apple tasting.

Two actions: 0 (label the item class 0, no feedback) and 1 (label it class 1,
which reveals the true class). With ``p = P(C=1 | x)`` the expected losses are

    action 0:  l01 * p
    action 1:  1 + (l11 - 1) * p

and the loss/feedback matrices (rows = action, columns = true class) are

    L   = [[0, l01], [1, l11]]
    Phi = [[-, -  ], [1, l11]]

The loss of labelling a class-0 item as 1 is fixed at one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class GameSpec:
    l01: float
    l11: float
    d: int
    T: int

    def __post_init__(self):
        if not (0.0 <= self.l11 <= self.l01):
            raise ValueError(f"need 0 <= l11 <= l01, got l11={self.l11}, l01={self.l01}")
        if self.l11 >= 1.0:
            raise ValueError("l11 must be < 1 so the feedback signal identifies the class")
        if self.d < 1 or self.T < 1:
            raise ValueError("d and T must be positive")

    @property
    def indifference_prob(self) -> float:
        """Class-1 probability at which both actions have equal expected loss."""
        return 1.0 / (1.0 + self.l01 - self.l11)

    @property
    def boundary_logit(self) -> float:
        return math.log(1.0 / (self.l01 - self.l11)) if self.l01 > self.l11 else math.inf

    @property
    def loss_matrix(self) -> np.ndarray:
        return np.array([[0.0, self.l01], [1.0, self.l11]])


@dataclass(frozen=True)
class Feedback:
    """What the learner sees after acting. ``signal`` is None for action 0."""

    signal: Optional[float] = None

    @property
    def observed(self) -> bool:
        return self.signal is not None

    def true_class(self, game: GameSpec) -> int:
        if self.signal is None:
            raise ValueError("no feedback was received for action 0")
        if self.signal == 1.0:
            return 0
        if self.signal == game.l11:
            return 1
        raise ValueError(f"signal {self.signal!r} is not in {{1, l11}}")


def sigmoid(z):
    """Logistic function, stable for large |z|. Accepts scalars or arrays."""
    if np.ndim(z) == 0:
        z = float(z)
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        ez = math.exp(z)
        return ez / (1.0 + ez)
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_sigmoid(z):
    """log(sigmoid(z)) without underflow."""
    return -np.logaddexp(0.0, -np.asarray(z, dtype=float))


def expected_loss(a: int, p, game: GameSpec):
    if np.any(np.asarray(p) < 0.0) or np.any(np.asarray(p) > 1.0):
        raise ValueError(f"class-1 probability must lie in [0, 1], got {p}")
    if a == 0:
        return game.l01 * p
    if a == 1:
        return 1.0 + (game.l11 - 1.0) * p
    raise ValueError(f"action must be 0 or 1, got {a}")


_TIE_TOL = 1e-12


def optimal_action_from_prob(p: float, game: GameSpec) -> int:
    # mu(0) - mu(1) = (1 + l01 - l11) p - 1; ties (to rounding) go to the informative action
    return 1 if (1.0 + game.l01 - game.l11) * p >= 1.0 - _TIE_TOL else 0


def optimal_action(theta, x, game: GameSpec) -> int:
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.shape != x.shape:
        raise ValueError(f"dimension mismatch: theta {theta.shape} vs x {x.shape}")
    return optimal_action_from_prob(sigmoid(float(x @ theta)), game)


def realized_loss(a: int, c: int, game: GameSpec) -> float:
    return float(game.loss_matrix[a, c])


def feedback(a: int, c: int, game: GameSpec) -> Feedback:
    if a == 0:
        return Feedback(None)
    return Feedback(realized_loss(1, c, game))
