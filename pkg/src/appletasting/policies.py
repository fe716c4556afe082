"""Decision policies for apple tasting.

Every policy follows the same round protocol: ``select(x)`` returns an action,
then ``update(x, a, fb)`` receives the feedback (absent for action 0). Only
rounds with action 1 add to the revealed-label dataset.

Stand-alone selection functions (``pgts_select``, ``pgids_select``, ...) carry
the per-round logic; the classes hold the state between rounds.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .core import Feedback, GameSpec, log_sigmoid, optimal_action, optimal_action_from_prob, sigmoid
from .inference import Dataset, GaussianPrior, fit_penalized_mle, gibbs, project_to_ellipsoid


@dataclass
class GibbsChain:
    """Warm-start state of a Gibbs chain carried from round to round."""

    last_theta: np.ndarray
    M: int = 15
    burn_in: int = 0
    truncate: bool = False
    radius: float = 1.0

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")

    def run(self, prior: GaussianPrior, data: Dataset, rng: np.random.Generator) -> np.ndarray:
        samples = gibbs(
            prior, self.M, data, self.last_theta, rng,
            burn_in=self.burn_in, truncate=self.truncate, radius=self.radius,
        )
        self.last_theta = samples[-1].copy()
        return samples


@dataclass(frozen=True)
class IdsEstimates:
    delta0: float
    delta1: float
    info1: float
    info_raw: float  # before clamping at zero


def pgts_select(chain: GibbsChain, prior: GaussianPrior, data: Dataset, x, game: GameSpec, rng) -> int:
    samples = chain.run(prior, data, rng)
    return optimal_action(samples[-1], x, game)


def likelihood_term(x, theta, c: int):
    """sigma(x'theta)^c (1 - sigma(x'theta))^(1-c); vectorised over rows of ``theta``."""
    z = np.asarray(theta) @ np.asarray(x)
    return sigmoid(z) if c == 1 else sigmoid(-z)


def _log_lik(z, c):
    return np.where(c == 1, log_sigmoid(z), log_sigmoid(-z))


def ids_estimates(samples, x, game: GameSpec, data: Dataset) -> IdsEstimates:
    """Monte-Carlo regret and information-gain estimates from M parameter samples.

    Likelihood products over the revealed data are handled in log space.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    M = samples.shape[0]
    z_t = samples @ np.asarray(x, dtype=float)
    p_t = sigmoid(z_t)

    mu0 = game.l01 * p_t
    mu1 = 1.0 + (game.l11 - 1.0) * p_t
    best = np.minimum(mu0, mu1)
    delta0 = float(np.mean(mu0 - best))
    delta1 = float(np.mean(mu1 - best))

    if len(data):
        log_prod = _log_lik(samples @ data.X.T, data.c).sum(axis=1)
    else:
        log_prod = np.zeros(M)
    log_m = math.log(M)
    log_D = logsumexp(log_prod) - log_m
    info = 0.0
    for c, log_l in ((1, log_sigmoid(z_t)), (0, log_sigmoid(-z_t))):
        log_Dc = logsumexp(log_prod + log_l) - log_m
        K_c = float(np.mean(log_Dc - log_D - log_l))
        info += K_c * float(np.mean(np.exp(log_l)))
    return IdsEstimates(delta0, delta1, max(info, 0.0), info)


def ids_prob_traditional(delta0: float, delta1: float) -> float:
    """Probability of action 1 minimising regret^2 / information (ratio form)."""
    gap = abs(delta1 - delta0)
    if gap == 0.0:
        return 1.0
    return min(1.0, delta0 / gap)


def ids_prob_tunable(delta0: float, delta1: float, info1: float, lam: float) -> float:
    """Probability of action 1 minimising regret^2 - lam * information (difference form)."""
    gap = delta1 - delta0
    if gap == 0.0:
        return 1.0
    p = lam * info1 / (2.0 * gap * gap) - delta0 / gap
    return min(1.0, max(0.0, p))


def pgids_select(
    chain: GibbsChain,
    prior: GaussianPrior,
    data: Dataset,
    x,
    game: GameSpec,
    lam: float,
    variant: str,
    rng: np.random.Generator,
) -> int:
    samples = chain.run(prior, data, rng)
    est = ids_estimates(samples, x, game, data)
    if variant == "tunable":
        p = ids_prob_tunable(est.delta0, est.delta1, est.info1, lam)
    elif variant == "traditional":
        p = ids_prob_traditional(est.delta0, est.delta1)
    else:
        raise ValueError(f"unknown IDS variant {variant!r}")
    return int(rng.random() < p)


def epsilon_greedy_select(data: Dataset, x, game: GameSpec, epsilon: float, rng, ridge: float = 1e-3, theta0=None):
    if rng.random() < epsilon:
        return int(rng.random() < 0.5)
    theta = fit_penalized_mle(data, ridge, theta0=theta0).theta
    return optimal_action(theta, x, game)


def confidence_width(x, V, N: int, d: int, R: float, C: float) -> float:
    """w = C (sqrt(2d(1 + N R^2/d) + 2 log(1/delta_N)) + R d) sqrt(x' V^-1 x), delta_N = max(N,1)^-2."""
    x = np.asarray(x, dtype=float)
    log_inv_delta = 2.0 * math.log(max(N, 1))
    quad = float(x @ np.linalg.solve(V, x))
    return C * (math.sqrt(2.0 * d * (1.0 + N * R * R / d) + 2.0 * log_inv_delta) + R * d) * math.sqrt(quad)


def cbp_regret_term(theta_hat, x, game: GameSpec) -> float:
    """Estimated mu(0) - mu(1) at theta_hat; negative when action 0 looks better."""
    return (1.0 + game.l01 - game.l11) * sigmoid(float(np.asarray(x) @ theta_hat)) - 1.0


@dataclass(frozen=True)
class CbpConstants:
    R: float
    radius: float = 1.0
    ridge: float = 1e-3
    C: Optional[float] = None

    @property
    def width_const(self) -> float:
        if self.C is not None:
            return self.C
        s = sigmoid(self.R * self.radius)
        return 1.0 / (s * (1.0 - s))


def cbp_decide(delta_hat: float, c_hat: float) -> int:
    return 0 if delta_hat <= -c_hat else 1


def cbp_side_select(data: Dataset, V, x, game: GameSpec, consts: CbpConstants, theta0=None, width=None):
    """One round of CBP-SIDE. ``width`` overrides the confidence width (for testing)."""
    fit = fit_penalized_mle(data, consts.ridge, theta0=theta0)
    theta_hat = project_to_ellipsoid(fit.theta, V, consts.radius)
    delta_hat = cbp_regret_term(theta_hat, x, game)
    if width is None:
        width = confidence_width(x, V, len(data), game.d, consts.R, consts.width_const)
    c_hat = (1.0 + game.l01 - game.l11) * width
    return cbp_decide(delta_hat, c_hat), fit.theta


class Policy(ABC):
    name: str = "policy"

    def __init__(self, game: GameSpec, name: Optional[str] = None):
        self.game = game
        if name is not None:
            self.name = name
        self.rng = np.random.default_rng(0)
        self.data = Dataset(game.d)

    def reset(self, seed) -> None:
        self.rng = np.random.default_rng(seed)
        self.data = Dataset(self.game.d)

    @abstractmethod
    def select(self, x) -> int:
        ...

    def update(self, x, a: int, fb: Feedback) -> None:
        if a == 1:
            self.data.append(x, fb.true_class(self.game))


class PGTS(Policy):
    name = "pg-ts"

    def __init__(self, game, prior: GaussianPrior, M: int = 15, burn_in: int = 0,
                 truncate: bool = False, radius: float = 1.0, name=None):
        super().__init__(game, name)
        self.prior = prior
        self._chain_kw = dict(M=M, burn_in=burn_in, truncate=truncate, radius=radius)
        self.chain = GibbsChain(prior.b.copy(), **self._chain_kw)

    def reset(self, seed):
        super().reset(seed)
        self.chain = GibbsChain(self.prior.sample(self.rng), **self._chain_kw)

    def select(self, x):
        return pgts_select(self.chain, self.prior, self.data, x, self.game, self.rng)


class PGIDS(PGTS):
    name = "pg-ids"

    def __init__(self, game, prior, M: int = 15, lam: float = 0.05, variant: str = "tunable", **kw):
        super().__init__(game, prior, M, **kw)
        if variant not in ("tunable", "traditional"):
            raise ValueError(f"unknown IDS variant {variant!r}")
        self.lam = lam
        self.variant = variant

    def select(self, x):
        return pgids_select(self.chain, self.prior, self.data, x, self.game, self.lam, self.variant, self.rng)


class EpsilonGreedy(Policy):
    name = "eps-greedy"

    def __init__(self, game, epsilon: float = 0.1, ridge: float = 1e-3, name=None):
        super().__init__(game, name)
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        self.epsilon = epsilon
        self.ridge = ridge
        self._theta = np.zeros(game.d)

    def reset(self, seed):
        super().reset(seed)
        self._theta = np.zeros(self.game.d)

    def select(self, x):
        if self.rng.random() < self.epsilon:
            return int(self.rng.random() < 0.5)
        self._theta = fit_penalized_mle(self.data, self.ridge, theta0=self._theta).theta
        return optimal_action(self._theta, x, self.game)


class CBPSide(Policy):
    name = "cbp-side"

    def __init__(self, game, consts: CbpConstants, name=None):
        super().__init__(game, name)
        self.consts = consts
        self.V = consts.ridge * np.eye(game.d)
        self._theta = np.zeros(game.d)

    def reset(self, seed):
        super().reset(seed)
        self.V = self.consts.ridge * np.eye(self.game.d)
        self._theta = np.zeros(self.game.d)

    def select(self, x):
        a, self._theta = cbp_side_select(self.data, self.V, x, self.game, self.consts, theta0=self._theta)
        return a

    def update(self, x, a, fb):
        super().update(x, a, fb)
        if a == 1:
            x = np.asarray(x, dtype=float)
            self.V = self.V + np.outer(x, x)


class Oracle(Policy):
    """Plays the optimal action for a known parameter."""

    name = "oracle"

    def __init__(self, game, theta, name=None):
        super().__init__(game, name)
        self.theta = np.asarray(theta, dtype=float)

    def select(self, x):
        return optimal_action(self.theta, x, self.game)


class AlwaysOne(Policy):
    name = "always-1"

    def select(self, x):
        return 1


class MLEGreedy(EpsilonGreedy):
    name = "greedy"

    def __init__(self, game, ridge: float = 1e-3, name=None):
        super().__init__(game, 0.0, ridge, name)


__all__ = [
    "AlwaysOne", "CBPSide", "CbpConstants", "EpsilonGreedy", "GibbsChain", "IdsEstimates", "MLEGreedy",
    "Oracle", "PGIDS", "PGTS", "Policy", "cbp_decide", "cbp_regret_term", "cbp_side_select",
    "confidence_width", "epsilon_greedy_select", "ids_estimates", "ids_prob_traditional",
    "ids_prob_tunable", "likelihood_term", "optimal_action_from_prob", "pgids_select", "pgts_select",
]
