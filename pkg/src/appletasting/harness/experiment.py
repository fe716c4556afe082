"""Replicated experiments, summaries, persistence and parameter sweeps."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import ExperimentConfig
from .episode import Trajectory, compute_metrics, generate_stream, run_episode

logger = logging.getLogger(__name__)

ROUNDS_HEADER = ["rep", "t", "policy", "action", "true_class", "expected_regret", "cum_regret"]
CURVES_HEADER = ["policy", "t", "q05", "median", "q95"]
QUANTILES = (0.05, 0.5, 0.95)


def rep_seed(master: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, rep])


def policy_seed(master: int, rep: int, name: str) -> np.random.SeedSequence:
    # crc32 rather than hash(): stable across interpreter runs
    return np.random.SeedSequence([master, rep, zlib.crc32(name.encode())])


@dataclass
class RepResult:
    rep: int
    stream_digest: str
    theta_star: np.ndarray
    trajectories: Dict[str, Trajectory]
    runtimes: Dict[str, float]


def run_replication(cfg: ExperimentConfig, rep: int) -> RepResult:
    spec = cfg.build_problem()
    env_rng = np.random.default_rng(rep_seed(cfg.seed, rep))
    if cfg.fixed_theta:
        env = spec.make_env(np.random.default_rng(np.random.SeedSequence([cfg.seed])))
    else:
        env = spec.make_env(env_rng)
    stream = generate_stream(env, env_rng)
    trajectories, runtimes = {}, {}
    for pcfg in cfg.policies:
        policy = pcfg.build(spec)
        policy.reset(policy_seed(cfg.seed, rep, pcfg.label))
        start = time.perf_counter()
        trajectories[pcfg.label] = run_episode(env, policy, stream=stream)
        runtimes[pcfg.label] = time.perf_counter() - start
    return RepResult(rep, stream.digest(), env.theta_star, trajectories, runtimes)


def _run_rep_star(args):
    return run_replication(*args)


def run_replications(cfg: ExperimentConfig) -> List[RepResult]:
    jobs = [(cfg, r) for r in range(cfg.reps)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_rep_star, jobs))
    else:
        results = []
        for job in jobs:
            results.append(run_replication(*job))
            logger.info("replication %d/%d done", job[1] + 1, cfg.reps)
    return sorted(results, key=lambda r: r.rep)


def _mean_defined(values) -> Optional[float]:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


@dataclass
class PolicySummary:
    name: str
    curves: np.ndarray  # (3, T): q05, median, q95 of cumulative regret
    final_regret: np.ndarray  # (reps,)
    precision_mean: Optional[float]
    recall_mean: Optional[float]
    precision_optimal_mean: Optional[float]
    recall_optimal_mean: Optional[float]
    runtime_seconds: float

    def to_dict(self) -> dict:
        q05, med, q95 = np.quantile(self.final_regret, QUANTILES)
        return {
            "final_regret_median": float(med),
            "final_regret_q05": float(q05),
            "final_regret_q95": float(q95),
            "final_regret_mean": float(np.mean(self.final_regret)),
            "precision_mean": self.precision_mean,
            "recall_mean": self.recall_mean,
            "precision_optimal_mean": self.precision_optimal_mean,
            "recall_optimal_mean": self.recall_optimal_mean,
            "runtime_seconds": self.runtime_seconds,
        }


@dataclass
class Summary:
    policies: Dict[str, PolicySummary]
    reps: int
    T: int
    d: int
    stream_digests: List[str] = field(default_factory=list)

    def __getitem__(self, name: str) -> PolicySummary:
        return self.policies[name]

    def to_dict(self) -> dict:
        return {
            "reps": self.reps,
            "T": self.T,
            "d": self.d,
            "policies": {name: s.to_dict() for name, s in self.policies.items()},
        }


def summarize(results: Sequence[RepResult], names: Sequence[str]) -> Summary:
    out = {}
    for name in names:
        trajs = [r.trajectories[name] for r in results]
        cum = np.stack([t.cum_regret for t in trajs])
        m_true = [compute_metrics(t) for t in trajs]
        m_opt = [compute_metrics(t, reference="optimal") for t in trajs]
        out[name] = PolicySummary(
            name=name,
            curves=np.quantile(cum, QUANTILES, axis=0),
            final_regret=cum[:, -1],
            precision_mean=_mean_defined(m.precision for m in m_true),
            recall_mean=_mean_defined(m.recall for m in m_true),
            precision_optimal_mean=_mean_defined(m.precision for m in m_opt),
            recall_optimal_mean=_mean_defined(m.recall for m in m_opt),
            runtime_seconds=float(sum(r.runtimes[name] for r in results)),
        )
    first = results[0].trajectories[names[0]]
    d = len(results[0].theta_star)
    return Summary(out, len(results), first.T, d, [r.stream_digest for r in results])


def _fmt(v: float) -> str:
    return repr(float(v))


def write_rounds_csv(path: Path, results: Sequence[RepResult], names: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROUNDS_HEADER)
        for r in results:
            for name in names:
                tr = r.trajectories[name]
                cum = tr.cum_regret
                for i in range(tr.T):
                    w.writerow([r.rep, i + 1, name, int(tr.actions[i]), int(tr.true_class[i]),
                                _fmt(tr.expected_regret[i]), _fmt(cum[i])])


def write_curves_csv(path: Path, summary: Summary) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVES_HEADER)
        for name, s in summary.policies.items():
            for i in range(s.curves.shape[1]):
                w.writerow([name, i + 1, _fmt(s.curves[0, i]), _fmt(s.curves[1, i]), _fmt(s.curves[2, i])])


def read_rounds_csv(path) -> Dict[str, np.ndarray]:
    """Cumulative-regret matrices (reps, T) per policy, rebuilt from a per-round CSV."""
    rows: Dict[str, Dict[int, Dict[int, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ROUNDS_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for row in reader:
            rows.setdefault(row["policy"], {}).setdefault(int(row["rep"]), {})[int(row["t"])] = float(
                row["cum_regret"]
            )
    out = {}
    for name, reps in rows.items():
        out[name] = np.array([[reps[r][t] for t in sorted(reps[r])] for r in sorted(reps)])
    return out


def quantile_curves(cum: np.ndarray) -> np.ndarray:
    return np.quantile(cum, QUANTILES, axis=0)


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> Summary:
    """Run every replication, summarise, and (if an output directory is known) persist.

    Files written: ``rounds.csv``, ``curves.csv``, ``summary.json``, ``config.json``.
    """
    names = [p.label for p in cfg.policies]
    results = run_replications(cfg)
    summary = summarize(results, names)
    out_dir = out_dir if out_dir is not None else cfg.output
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_rounds_csv(out / "rounds.csv", results, names)
        write_curves_csv(out / "curves.csv", summary)
        (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
        (out / "config.json").write_text(cfg.model_dump_json(indent=2) + "\n")
    return summary


SWEEP_AXES = ("d", "M", "lambda")
SWEEP_HEADER = ["axis", "value", "policy", "final_regret_mean", "final_regret_median", "final_regret_q05",
                "final_regret_q95", "scaled_mean", "scaled_q05", "scaled_q95"]


def apply_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    """Copy of ``cfg`` with one axis set; M and lambda apply to every policy that has them."""
    if axis == "d":
        if cfg.problem.id not in ("i", "ii"):
            raise ValueError("the d axis needs builtin problem i or ii")
        return cfg.model_copy(update={"problem": cfg.problem.model_copy(update={"d": int(value)})}, deep=True)
    if axis == "M":
        attr, cast = "M", int
    elif axis == "lambda":
        attr, cast = "lam", float
    else:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    policies = []
    touched = False
    for p in cfg.policies:
        if hasattr(p, attr):
            update = {attr: cast(value)}
            if p.name is None and attr == "lam":
                update["name"] = p.label  # keep the label stable across the sweep
            p = p.model_copy(update=update)
            touched = True
        policies.append(p)
    if not touched:
        raise ValueError(f"no configured policy has parameter {attr!r}")
    return cfg.model_copy(update={"policies": policies}, deep=True)


def sweep(cfg: ExperimentConfig, axis: str, values: Sequence, out_dir=None) -> List[dict]:
    """Run the experiment at each axis value; the d axis also reports regret / sqrt(d)."""
    rows = []
    for value in values:
        sub = apply_axis(cfg, axis, value)
        sub_out = None if out_dir is None else Path(out_dir) / f"{axis}={value}"
        summary = run_experiment(sub, sub_out)
        scale = math.sqrt(float(value)) if axis == "d" else 1.0
        for name, s in summary.policies.items():
            fr = s.final_regret
            q05, med, q95 = np.quantile(fr, QUANTILES)
            rows.append({
                "axis": axis, "value": value, "policy": name,
                "final_regret_mean": float(fr.mean()), "final_regret_median": float(med),
                "final_regret_q05": float(q05), "final_regret_q95": float(q95),
                "scaled_mean": float(fr.mean() / scale), "scaled_q05": float(q05 / scale),
                "scaled_q95": float(q95 / scale),
            })
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        with open(Path(out_dir) / "sweep.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, SWEEP_HEADER, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    return rows
