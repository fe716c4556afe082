"""Synthetic apple-tasting problems: true parameter, context process, class draws."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .core import GameSpec, sigmoid


@dataclass(frozen=True)
class ContextProcess:
    """Context law. ``kind`` is one of ``iid_gaussian``, ``gaussian_mixture``, ``drifting_gaussian``.

    iid_gaussian: ``mean`` (d,), ``cov`` (d, d).
    gaussian_mixture: ``means`` (k, d), ``covs`` (k, d, d), ``weights`` (k,).
    drifting_gaussian: ``mean_start``, ``mean_end`` (d,), ``sd``; the mean moves
    linearly from start (t=1) to end (t=T), coordinates independent.
    ``clip`` bounds every coordinate to [-clip, clip] when set.
    """

    kind: str
    mean: Optional[np.ndarray] = None
    cov: Optional[np.ndarray] = None
    means: Optional[np.ndarray] = None
    covs: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    mean_start: Optional[np.ndarray] = None
    mean_end: Optional[np.ndarray] = None
    sd: Optional[float] = None
    clip: Optional[float] = None
    _chol: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "iid_gaussian":
            object.__setattr__(self, "_chol", np.linalg.cholesky(np.atleast_2d(self.cov)))
        elif self.kind == "gaussian_mixture":
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
                raise ValueError("mixture weights must be nonnegative and sum to 1")
            if len(w) != len(self.means) or len(w) != len(self.covs):
                raise ValueError("mixture means, covs and weights must have equal length")
            object.__setattr__(self, "_chol", np.stack([np.linalg.cholesky(c) for c in self.covs]))
        elif self.kind == "drifting_gaussian":
            if self.sd is None or self.sd <= 0:
                raise ValueError("drifting_gaussian needs sd > 0")
            if np.shape(self.mean_start) != np.shape(self.mean_end):
                raise ValueError("drift endpoints must have equal shape")
        else:
            raise ValueError(f"unknown context process kind {self.kind!r}")
        if self.clip is not None and self.clip <= 0:
            raise ValueError("clip must be positive")

    @classmethod
    def iid_gaussian(cls, mean, cov, clip=None):
        return cls("iid_gaussian", mean=np.atleast_1d(np.asarray(mean, float)),
                   cov=np.atleast_2d(np.asarray(cov, float)), clip=clip)

    @classmethod
    def gaussian_mixture(cls, means, covs, weights, clip=None):
        return cls("gaussian_mixture", means=np.atleast_2d(np.asarray(means, float)),
                   covs=np.asarray(covs, float).reshape(len(weights), -1, np.shape(means)[-1]),
                   weights=np.asarray(weights, float), clip=clip)

    @classmethod
    def drifting_gaussian(cls, mean_start, mean_end, sd, clip=None):
        return cls("drifting_gaussian", mean_start=np.atleast_1d(np.asarray(mean_start, float)),
                   mean_end=np.atleast_1d(np.asarray(mean_end, float)), sd=float(sd), clip=clip)

    @property
    def d(self) -> int:
        if self.kind == "iid_gaussian":
            return self.mean.shape[0]
        if self.kind == "gaussian_mixture":
            return self.means.shape[1]
        return self.mean_start.shape[0]

    def mean_at(self, t: int, T: int) -> np.ndarray:
        if self.kind == "iid_gaussian":
            return self.mean
        if self.kind == "gaussian_mixture":
            return self.weights @ self.means
        frac = 0.0 if T == 1 else (t - 1) / (T - 1)
        return self.mean_start + frac * (self.mean_end - self.mean_start)

    def sample(self, t: int, T: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.d)
        if self.kind == "iid_gaussian":
            x = self.mean + self._chol @ z
        elif self.kind == "gaussian_mixture":
            k = rng.choice(len(self.weights), p=self.weights)
            x = self.means[k] + self._chol[k] @ z
        else:
            x = self.mean_at(t, T) + self.sd * z
        if self.clip is not None:
            x = np.clip(x, -self.clip, self.clip)
        return x

    def norm_bound(self, q: float = 0.999) -> float:
        """Bound R on |x|_2 holding with probability ``q`` per draw (exact under clipping)."""
        d = self.d
        if self.kind == "iid_gaussian":
            centre, scale = np.linalg.norm(self.mean), np.sqrt(np.linalg.eigvalsh(self.cov).max())
        elif self.kind == "gaussian_mixture":
            centre = np.linalg.norm(self.means, axis=1).max()
            scale = np.sqrt(max(np.linalg.eigvalsh(c).max() for c in self.covs))
        else:
            centre = max(np.linalg.norm(self.mean_start), np.linalg.norm(self.mean_end))
            scale = self.sd
        bound = float(centre + scale * np.sqrt(stats.chi2.ppf(q, d)))
        if self.clip is not None:
            bound = min(bound, float(self.clip * np.sqrt(d)))
        return bound


@dataclass
class Environment:
    theta_star: np.ndarray
    process: ContextProcess
    game: GameSpec

    def __post_init__(self):
        self.theta_star = np.atleast_1d(np.asarray(self.theta_star, dtype=float))
        if self.theta_star.shape != (self.game.d,) or self.process.d != self.game.d:
            raise ValueError("theta*, context process and game must agree on d")

    def class_prob(self, x) -> float:
        return sigmoid(float(np.asarray(x) @ self.theta_star))


def sample_context(env: Environment, t: int, rng: np.random.Generator) -> np.ndarray:
    if not 1 <= t <= env.game.T:
        raise ValueError(f"round {t} outside [1, {env.game.T}]")
    return env.process.sample(t, env.game.T, rng)


def sample_class(env: Environment, x, rng: np.random.Generator) -> int:
    return int(rng.random() < env.class_prob(x))


@dataclass(frozen=True)
class ThetaLaw:
    """How theta* is generated per replication.

    ``uniform``: each coordinate U[low, high], zeroed independently with prob ``p_zero``.
    ``fixed``: always ``value``.
    """

    kind: str = "uniform"
    low: float = -1.0
    high: float = 1.0
    p_zero: float = 0.0
    value: Optional[Sequence[float]] = None

    def sample(self, d: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "fixed":
            theta = np.asarray(self.value, dtype=float)
            if theta.shape != (d,):
                raise ValueError(f"fixed theta* must have length {d}")
            return theta.copy()
        if self.kind != "uniform":
            raise ValueError(f"unknown theta law {self.kind!r}")
        theta = rng.uniform(self.low, self.high, size=d)
        if self.p_zero > 0:
            theta[rng.random(d) < self.p_zero] = 0.0
        return theta


@dataclass(frozen=True)
class ProblemSpec:
    """Everything needed to instantiate an Environment for one replication."""

    game: GameSpec
    process: ContextProcess
    theta_law: ThetaLaw
    name: str = "custom"

    def make_env(self, rng: np.random.Generator) -> Environment:
        return Environment(self.theta_law.sample(self.game.d, rng), self.process, self.game)


def builtin_problem(pid: str, d: Optional[int] = None, T: Optional[int] = None) -> ProblemSpec:
    """Problem families (i), (ii), (iii); ``d``/``T`` override the default size of (i) and (ii)."""
    if pid == "i":
        d = d or 5
        return ProblemSpec(GameSpec(l01=0.4, l11=0.05, d=d, T=T or 500),
                           ContextProcess.iid_gaussian(np.zeros(d), np.eye(d)), ThetaLaw("uniform"), "i")
    if pid == "ii":
        d = d or 20
        return ProblemSpec(GameSpec(l01=0.7, l11=0.1, d=d, T=T or 1000),
                           ContextProcess.iid_gaussian(np.zeros(d), 8.0 * np.eye(d)),
                           ThetaLaw("uniform", p_zero=0.25), "ii")
    if pid == "iii":
        if d not in (None, 1):
            raise ValueError("problem iii is one-dimensional")
        return ProblemSpec(GameSpec(l01=1.0, l11=0.0, d=1, T=T or 500),
                           ContextProcess.drifting_gaussian([-0.1], [0.0], 0.025),
                           ThetaLaw("fixed", value=[1.0]), "iii")
    raise ValueError(f"unknown problem id {pid!r}; choose from i, ii, iii")


def make_problem(pid: str, rng: np.random.Generator) -> Environment:
    return builtin_problem(pid).make_env(rng)


PROBLEM_DESCRIPTIONS = {
    "i": "d=5, theta*_j ~ U[-1,1], x ~ N(0, I), l01=0.4, l11=0.05, T=500",
    "ii": "d=20, theta*_j ~ U[-1,1] w.p. 0.75 else 0, x ~ N(0, 8I), l01=0.7, l11=0.1, T=1000",
    "iii": "d=1, theta*=1, x ~ N(mu_t, 0.025^2) with mu_t from -0.1 to 0, l01=1, l11=0, T=500",
}
