"""Experiment configuration: schema, loading, and construction of problems and policies."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core import GameSpec
from ..envs import ContextProcess, ProblemSpec, ThetaLaw, builtin_problem
from ..inference import GaussianPrior
from ..policies import PGIDS, PGTS, CBPSide, CbpConstants, EpsilonGreedy, Policy


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PriorConfig(_Strict):
    mean: Union[float, List[float]] = 0.0
    scale: float = Field(1.0, gt=0)

    def build(self, d: int) -> GaussianPrior:
        mean = np.full(d, self.mean) if isinstance(self.mean, float) else np.asarray(self.mean, float)
        if mean.shape != (d,):
            raise ValueError(f"prior mean must have length {d}")
        return GaussianPrior(mean, self.scale * np.eye(d))


class PGTSConfig(_Strict):
    type: Literal["pgts"]
    name: Optional[str] = None
    M: int = Field(15, ge=1)
    prior: PriorConfig = PriorConfig()
    burn_in: int = Field(0, ge=0)
    truncate: bool = False
    radius: float = Field(1.0, gt=0)

    def build(self, spec: ProblemSpec) -> Policy:
        return PGTS(spec.game, self.prior.build(spec.game.d), M=self.M, burn_in=self.burn_in,
                    truncate=self.truncate, radius=self.radius, name=self.label)

    @property
    def label(self) -> str:
        return self.name or "pg-ts"


class PGIDSConfig(PGTSConfig):
    type: Literal["pgids"]
    lam: float = Field(0.05, ge=0)
    variant: Literal["tunable", "traditional"] = "tunable"

    def build(self, spec: ProblemSpec) -> Policy:
        return PGIDS(spec.game, self.prior.build(spec.game.d), M=self.M, lam=self.lam, variant=self.variant,
                     burn_in=self.burn_in, truncate=self.truncate, radius=self.radius, name=self.label)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        return "pg-ids-trad" if self.variant == "traditional" else f"pg-ids-tune-{self.lam:g}"


class EpsGreedyConfig(_Strict):
    type: Literal["egreedy"]
    name: Optional[str] = None
    epsilon: float = Field(0.1, ge=0, le=1)
    ridge: float = Field(1e-3, ge=0)

    def build(self, spec: ProblemSpec) -> Policy:
        return EpsilonGreedy(spec.game, self.epsilon, self.ridge, name=self.label)

    @property
    def label(self) -> str:
        return self.name or f"eps-greedy-{self.epsilon:g}"


class CBPConfig(_Strict):
    type: Literal["cbp"]
    name: Optional[str] = None
    R: Optional[float] = Field(None, gt=0)
    radius: float = Field(1.0, gt=0)
    ridge: float = Field(1e-3, gt=0)
    C: Optional[float] = Field(None, gt=0)

    def build(self, spec: ProblemSpec) -> Policy:
        R = self.R if self.R is not None else spec.process.norm_bound()
        return CBPSide(spec.game, CbpConstants(R=R, radius=self.radius, ridge=self.ridge, C=self.C),
                       name=self.label)

    @property
    def label(self) -> str:
        return self.name or "cbp-side"


PolicyConfig = Annotated[Union[PGIDSConfig, PGTSConfig, EpsGreedyConfig, CBPConfig], Field(discriminator="type")]


class ContextConfig(_Strict):
    kind: Literal["iid_gaussian", "gaussian_mixture", "drifting_gaussian"]
    mean: Optional[List[float]] = None
    cov: Optional[List[List[float]]] = None
    variance: Optional[float] = Field(None, gt=0)
    means: Optional[List[List[float]]] = None
    variances: Optional[List[float]] = None
    weights: Optional[List[float]] = None
    mean_start: Optional[List[float]] = None
    mean_end: Optional[List[float]] = None
    sd: Optional[float] = Field(None, gt=0)
    clip: Optional[float] = Field(None, gt=0)

    def build(self, d: int) -> ContextProcess:
        if self.kind == "iid_gaussian":
            mean = np.zeros(d) if self.mean is None else np.asarray(self.mean, float)
            if self.cov is not None:
                cov = np.asarray(self.cov, float)
            else:
                cov = (self.variance or 1.0) * np.eye(d)
            return ContextProcess.iid_gaussian(mean, cov, clip=self.clip)
        if self.kind == "gaussian_mixture":
            if self.means is None or self.weights is None:
                raise ValueError("gaussian_mixture needs means and weights")
            variances = self.variances or [1.0] * len(self.weights)
            covs = [v * np.eye(d) for v in variances]
            return ContextProcess.gaussian_mixture(self.means, covs, self.weights, clip=self.clip)
        if self.mean_start is None or self.mean_end is None or self.sd is None:
            raise ValueError("drifting_gaussian needs mean_start, mean_end and sd")
        return ContextProcess.drifting_gaussian(self.mean_start, self.mean_end, self.sd, clip=self.clip)


class ThetaConfig(_Strict):
    kind: Literal["uniform", "fixed"] = "uniform"
    low: float = -1.0
    high: float = 1.0
    p_zero: float = Field(0.0, ge=0, le=1)
    value: Optional[List[float]] = None

    def build(self) -> ThetaLaw:
        return ThetaLaw(self.kind, self.low, self.high, self.p_zero, self.value)


class ProblemConfig(_Strict):
    id: Optional[Literal["i", "ii", "iii"]] = None
    d: Optional[int] = Field(None, ge=1)
    T: Optional[int] = Field(None, ge=1)
    l01: Optional[float] = None
    l11: Optional[float] = None
    context: Optional[ContextConfig] = None
    theta: Optional[ThetaConfig] = None

    @model_validator(mode="after")
    def _builtin_or_custom(self):
        custom = [k for k in ("l01", "l11", "context", "theta") if getattr(self, k) is not None]
        if self.id is None:
            missing = [k for k in ("d", "T", "l01", "l11", "context") if getattr(self, k) is None]
            if missing:
                raise ValueError(f"custom problem is missing {missing}")
        elif custom:
            raise ValueError(f"builtin problem {self.id!r} does not accept {custom}")
        return self

    def build(self) -> ProblemSpec:
        if self.id is not None:
            return builtin_problem(self.id, d=self.d, T=self.T)
        game = GameSpec(l01=self.l01, l11=self.l11, d=self.d, T=self.T)
        theta = (self.theta or ThetaConfig()).build()
        return ProblemSpec(game, self.context.build(self.d), theta, "custom")


class ExperimentConfig(_Strict):
    problem: ProblemConfig
    policies: List[PolicyConfig] = Field(min_length=1)
    reps: int = Field(50, ge=1)
    seed: int = Field(0, ge=0)
    output: Optional[str] = None
    fixed_theta: bool = False
    workers: int = Field(1, ge=1)

    @field_validator("policies")
    @classmethod
    def _unique_names(cls, policies):
        labels = [p.label for p in policies]
        dupes = sorted({n for n in labels if labels.count(n) > 1})
        if dupes:
            raise ValueError(f"policy names must be unique, duplicated: {dupes}")
        return policies

    def build_problem(self) -> ProblemSpec:
        return self.problem.build()


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists (field path, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "\n".join(f"  {loc}: {msg}" for loc, msg in self.errors)
        super().__init__(f"invalid experiment config:\n{lines}")


def parse_config(raw: dict) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(
            (".".join(str(p) for p in e["loc"]) or "<root>", e["msg"]) for e in exc.errors()
        ) from None
    try:
        spec = cfg.build_problem()
        for p in cfg.policies:
            p.build(spec)
    except ValueError as exc:
        raise ConfigError([("problem/policies", str(exc))]) from None
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text()
    raw = yaml.safe_load(text) if path.suffix in (".yaml", ".yml") else json.loads(text)
    if not isinstance(raw, dict):
        raise ConfigError([("<root>", "config must be a mapping")])
    return parse_config(raw)
