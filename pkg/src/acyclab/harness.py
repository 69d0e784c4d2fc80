"""Monte Carlo experiments over the hard-instance distributions, with CSV output.

Each trial explores once up to the largest budget in the Q-grid; every smaller
budget is read off the same run's prefix. Strategies never look at the budget,
so a prefix is exactly the run with the smaller budget, and cells for different
Q are paired by construction.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence, TextIO

import numpy as np

from .core import RandomStream, derive_params
from .exploration import (STRATEGIES, CycleWatch, PrefixView, TranscriptIndex, run_coupled,
                          run_strategy, surprises)
from .instances import DagOracle, PermOracle

KINDS = ("surprise", "cycle", "htail", "coupling", "distinguish")
DIST_CODE = {"perm": 0, "dag": 1}


@dataclass
class ExperimentConfig:
    kind: str = "surprise"
    distribution: str = "perm"  # perm | dag | both | coupled
    n_grid: list[int] = field(default_factory=lambda: [30000])
    d: int = 8
    Q_grid: list[int] = field(default_factory=lambda: [10, 20])
    trials: int = 1000
    strategy: str = "uniform_fresh"
    seed: int = 0
    label_mode: str = "epoch"
    statistic: str = "cycle_found"  # cycle_found | surprise_count_threshold | both
    threshold: int = 1
    spot_checks: int = 20
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not self.n_grid or not self.Q_grid:
            raise ValueError("n_grid and Q_grid must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if min(self.Q_grid) < 0:
            raise ValueError("Q values must be >= 0")

    @classmethod
    def load(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def distributions(self) -> list[str]:
        return ["perm", "dag"] if self.distribution in ("both", "coupled") else [self.distribution]


@dataclass
class ExperimentResult:
    rows: list[dict]
    columns: list[str]
    failures: list[str] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def write_csv(self, target: str | Path | TextIO) -> None:
        if isinstance(target, (str, Path)):
            with open(target, "w", newline="") as fh:
                self.write_csv(fh)
            return
        w = csv.DictWriter(target, fieldnames=self.columns)
        w.writeheader()
        for row in self.rows:
            w.writerow({k: row[k] for k in self.columns})


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.sort(np.asarray(values, dtype=float))
    if arr.size == 0:
        return 0.0, 0.0
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), se


def _map(fn: Callable, jobs: list, workers: int) -> list:
    if workers <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


def _oracle(dist: str, params, stream: RandomStream):
    return (PermOracle if dist == "perm" else DagOracle)(params, stream)


def _explore(cfg: ExperimentConfig, dist: str, n: int, trial: int, Q: int):
    params = derive_params(n, cfg.d)
    base = RandomStream(cfg.seed, (n, trial, DIST_CODE[dist]))
    return run_strategy(_oracle(dist, params, base.child(0)), cfg.strategy, Q, base.child(1), cfg.label_mode)


# ----------------------------------------------------------------------------
# per-trial workers (top level so they can be sent to worker processes)

def _trial_surprise(job) -> tuple[list[int], int]:
    cfg, dist, n, trial, Q = job
    t = _explore(cfg, dist, n, trial, Q)
    return surprises(t), len(t)


def _trial_cycle(job) -> int | None:
    cfg, dist, n, trial, Q = job
    t = _explore(cfg, dist, n, trial, Q)
    watch = CycleWatch()
    for v, ans in t.queries:
        if watch.add(v, ans) is not None:
            return watch.found_at
    return None


def _trial_htail(job) -> tuple[list[tuple[int, int, int, int]], int, list[str]]:
    cfg, dist, n, trial, Q = job
    t = _explore(cfg, dist, n, trial, Q)
    idx = TranscriptIndex(t)
    rows = []
    for q, (u, _) in enumerate(t.queries, start=1):
        if t.is_blue(u):
            res = idx.closure(q, u)
            depth = max((idx.forest_depth(x) for x, _ in res.selected), default=0)
            rows.append((q, res.H, len(res.A), max(depth, idx.forest_depth(u))))
    failures = []
    if trial < cfg.spot_checks:
        for q in range(1, len(t) + 1):
            view = PrefixView(t, q)
            for u, _ in t.queries[:q]:
                if t.is_blue(u) and idx.closure(q, u).A != view.ancestors_bruteforce(u):
                    failures.append(f"closure mismatch n={n} trial={trial} q={q} u={u}")
    return rows, len(t), failures


def _trial_coupling(job):
    cfg, _, n, trial, Q = job
    params = derive_params(n, cfg.d)
    res = run_coupled(params, cfg.strategy, Q, RandomStream(cfg.seed, (n, trial, 2)), cfg.label_mode)
    agree = 0
    for a, b in zip(res.perm.queries, res.dag.queries):
        if a != b:
            break
        agree += 1
    return agree, res.first_anomaly, res.first_surprise, res.prefix_ok()


def _trial_distinguish(job):
    cfg, dist, n, trial, Q = job
    t = _explore(cfg, dist, n, trial, Q)
    watch = CycleWatch()
    found = None
    for v, ans in t.queries:
        if watch.add(v, ans) is not None:
            found = watch.found_at
            break
    return found, surprises(t), len(t)


# ----------------------------------------------------------------------------
# experiments

def _jobs(cfg: ExperimentConfig, dist: str, n: int) -> list:
    Qmax = max(max(cfg.Q_grid), 1)
    return [(cfg, dist, n, trial, Qmax) for trial in range(cfg.trials)]


SURPRISE_COLS = ["distribution", "strategy", "n", "N", "d", "Q", "trials", "mean_surprises",
                 "se_surprises", "frac_any", "se_frac_any"]


def exp_surprise_curve(cfg: ExperimentConfig) -> ExperimentResult:
    rows = []
    for dist in cfg.distributions():
        for n in cfg.n_grid:
            runs = _map(_trial_surprise, _jobs(cfg, dist, n), cfg.workers)
            for Q in sorted(cfg.Q_grid):
                counts = [sum(1 for s in times if s <= Q) for times, _ in runs]
                mean, se = _mean_se(counts)
                frac, fse = _mean_se([c > 0 for c in counts])
                rows.append(dict(distribution=dist, strategy=cfg.strategy, n=n, N=n // 3, d=cfg.d, Q=Q,
                                 trials=cfg.trials, mean_surprises=mean, se_surprises=se,
                                 frac_any=frac, se_frac_any=fse))
    return ExperimentResult(rows, SURPRISE_COLS)


CYCLE_COLS = ["strategy", "n", "N", "d", "Q", "trials", "frac_cycle", "se_frac_cycle"]


def exp_cycle_probe(cfg: ExperimentConfig) -> ExperimentResult:
    rows = []
    crossings = {}
    for n in cfg.n_grid:
        found = _map(_trial_cycle, _jobs(cfg, "perm", n), cfg.workers)
        for Q in sorted(cfg.Q_grid):
            frac, se = _mean_se([f is not None and f <= Q for f in found])
            rows.append(dict(strategy=cfg.strategy, n=n, N=n // 3, d=cfg.d, Q=Q, trials=cfg.trials,
                             frac_cycle=frac, se_frac_cycle=se))
        times = sorted(f if f is not None else math.inf for f in found)
        crossings[n] = times[(len(times) - 1) // 2]
    notes = {"median_detection_time": crossings}
    finite = [(n, q) for n, q in crossings.items() if math.isfinite(q)]
    if len(finite) >= 2:
        slope = np.polyfit(np.log([n for n, _ in finite]), np.log([q for _, q in finite]), 1)[0]
        notes["loglog_slope"] = float(slope)
    return ExperimentResult(rows, CYCLE_COLS, notes=notes)


HTAIL_COLS = ["strategy", "n", "N", "d", "Q", "trials", "count", "h_q50", "h_q90", "h_q99", "h_max",
              "p_h_ge_1", "p_h_ge_2", "p_h_ge_3", "p_h_ge_4", "tail_ratio", "anc_max", "depth_max",
              "anc_bound_violations"]


def exp_h_tail(cfg: ExperimentConfig) -> ExperimentResult:
    rows, failures = [], []
    for n in cfg.n_grid:
        runs = _map(_trial_htail, _jobs(cfg, "perm", n), cfg.workers)
        for _, _, fails in runs:
            failures.extend(fails)
        for Q in sorted(cfg.Q_grid):
            hs, anc, viol = [], 0, 0
            depth_all = 0
            for recs, _, _ in runs:
                mine = [r for r in recs if r[0] <= Q]
                if not mine:
                    continue
                h_max = max(r[1] for r in mine)
                a_max = max(r[2] for r in mine)
                dep = max(r[3] for r in mine)
                viol += a_max > (h_max + 1) * (dep + 1)
                anc, depth_all = max(anc, a_max), max(depth_all, dep)
                hs.extend(r[1] for r in mine)
            arr = np.sort(np.asarray(hs, dtype=float)) if hs else np.zeros(1)
            tail = [float(np.mean(arr >= k)) for k in range(1, 5)]
            ratios = [tail[k + 1] / tail[k] for k in range(3) if tail[k] > 0]
            rows.append(dict(strategy=cfg.strategy, n=n, N=n // 3, d=cfg.d, Q=Q, trials=cfg.trials,
                             count=len(hs), h_q50=float(np.quantile(arr, 0.5)),
                             h_q90=float(np.quantile(arr, 0.9)), h_q99=float(np.quantile(arr, 0.99)),
                             h_max=float(arr.max()), p_h_ge_1=tail[0], p_h_ge_2=tail[1], p_h_ge_3=tail[2],
                             p_h_ge_4=tail[3], tail_ratio=max(ratios) if ratios else 0.0,
                             anc_max=anc, depth_max=depth_all, anc_bound_violations=viol))
            if viol:
                failures.append(f"ancestor bound violated in {viol} runs at n={n} Q={Q}")
    return ExperimentResult(rows, HTAIL_COLS, failures)


COUPLING_COLS = ["strategy", "n", "N", "d", "Q", "trials", "frac_identical", "se_identical",
                 "frac_anomaly", "frac_surprise", "anomaly_over_Q_by_N", "prefix_failures"]


def exp_coupling(cfg: ExperimentConfig) -> ExperimentResult:
    rows, failures = [], []
    for n in cfg.n_grid:
        runs = _map(_trial_coupling, _jobs(cfg, "perm", n), cfg.workers)
        bad = sum(not ok for *_, ok in runs)
        if bad:
            failures.append(f"identical-prefix invariant failed in {bad} coupled runs at n={n}")
        N = n // 3
        for Q in sorted(cfg.Q_grid):
            ident, se = _mean_se([agree >= Q for agree, _, _, _ in runs])
            anom = float(np.mean([a is not None and a <= Q for _, a, _, _ in runs]))
            surp = float(np.mean([s is not None and s <= Q for _, _, s, _ in runs]))
            rows.append(dict(strategy=cfg.strategy, n=n, N=N, d=cfg.d, Q=Q, trials=cfg.trials,
                             frac_identical=ident, se_identical=se, frac_anomaly=anom, frac_surprise=surp,
                             anomaly_over_Q_by_N=anom / (Q / N) if Q else 0.0, prefix_failures=bad))
    return ExperimentResult(rows, COUPLING_COLS, failures)


STATISTICS = ("cycle_found", "surprise_count_threshold")
DISTINGUISH_COLS = ["statistic", "strategy", "n", "N", "d", "Q", "trials", "accept_dag", "accept_perm",
                    "gap", "se_gap"]


def accepts(statistic: str, found_at: int | None, surprise_times: list[int], Q: int, threshold: int) -> bool:
    """Whether the statistic declares the input acyclic after ``Q`` queries."""
    if statistic == "cycle_found":
        return found_at is None or found_at > Q
    if statistic == "surprise_count_threshold":
        return sum(1 for s in surprise_times if s <= Q) < threshold
    raise ValueError(f"unknown statistic {statistic!r}")


def exp_distinguish(cfg: ExperimentConfig, statistic: str | None = None) -> ExperimentResult:
    """Acceptance gap between the two distributions; ``statistic="both"`` scores one run set twice."""
    statistic = statistic or cfg.statistic
    stats = list(STATISTICS) if statistic == "both" else [statistic]
    for s in stats:
        if s not in STATISTICS:
            raise ValueError(f"unknown statistic {s!r}")
    rows = []
    for n in cfg.n_grid:
        runs = {dist: _map(_trial_distinguish, _jobs(cfg, dist, n), cfg.workers) for dist in ("dag", "perm")}
        for stat in stats:
            for Q in sorted(cfg.Q_grid):
                acc = {dist: [accepts(stat, f, s, Q, cfg.threshold) for f, s, _ in runs[dist]]
                       for dist in runs}
                p_dag, p_perm = float(np.mean(acc["dag"])), float(np.mean(acc["perm"]))
                se = math.sqrt((p_dag * (1 - p_dag) + p_perm * (1 - p_perm)) / cfg.trials)
                rows.append(dict(statistic=stat, strategy=cfg.strategy, n=n, N=n // 3, d=cfg.d, Q=Q,
                                 trials=cfg.trials, accept_dag=p_dag, accept_perm=p_perm,
                                 gap=abs(p_dag - p_perm), se_gap=se))
    failures = [f"one-sided statistic rejected a dag instance at n={r['n']} Q={r['Q']}"
                for r in rows if r["statistic"] == "cycle_found" and r["accept_dag"] < 1.0]
    return ExperimentResult(rows, DISTINGUISH_COLS, failures)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    fn = {"surprise": exp_surprise_curve, "cycle": exp_cycle_probe, "htail": exp_h_tail,
          "coupling": exp_coupling, "distinguish": exp_distinguish}[cfg.kind]
    res = fn(cfg)
    res.notes["config"] = asdict(cfg)
    if cfg.output:
        res.write_csv(cfg.output)
    return res
