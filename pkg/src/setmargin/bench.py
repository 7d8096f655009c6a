"""Benchmark harness: problem generators, utility-loss evaluation, and
seeded multi-user experiments emitting CSV aggregates.

Utility loss of a recommendation is the gap to the best feasible
configuration under the user's true weights; the maximum is found by brute
force on small spaces and by a single fixed-objective MILP otherwise.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import milp, solver
from .loop import LoopConfig, run
from .milp import Hyperparameters
from .problem import (Attribute, Configuration, ProblemSpec, WeightBounds,
                      count_feasible, dump_problem, enumerate_feasible,
                      load_problem, reduce_real_attributes, utility)
from .users import SimulatedUser, UtilityDistribution, sample_utility

BRUTE_FORCE_LIMIT = 100_000

TIMING_WALL = "wall"
TIMING_NONE = "none"

METRICS_HEADER = ("user", "iteration", "queries", "utility_loss", "cumulative_seconds")
SUMMARY_HEADER = ("iteration", "median_loss", "std_loss", "median_time")


def gen_synthetic(r: int) -> ProblemSpec:
    """r attributes with r values each (m = r^2 features, r^r configurations);
    no constraints beyond one-hot exclusivity; weight bounds [0, 100]."""
    if r < 2:
        raise ValueError("r must be >= 2")
    attrs = [Attribute(f"a{i}", r) for i in range(r)]
    m = r * r
    bounds = WeightBounds(np.zeros(m), np.full(m, 100.0))
    return ProblemSpec(attrs, (), None, bounds, name=f"synthetic-r{r}")


def gen_pc() -> ProblemSpec:
    """The constructive PC catalog shipped with the package: six categorical
    attributes plus a derived price, restricted by 16 Horn clauses."""
    data = resources.files("setmargin").joinpath("data/pc.json").read_text()
    return load_problem(json.loads(data))


_SYNTH_RE = re.compile(r"^synthetic:r=(\d+)$")


def make_spec(dataset_id: str) -> ProblemSpec:
    if dataset_id == "pc":
        return gen_pc()
    m = _SYNTH_RE.match(dataset_id)
    if m:
        return gen_synthetic(int(m.group(1)))
    raise ValueError(f"unknown dataset {dataset_id!r} (use 'synthetic:r=N' or 'pc')")


def best_utility(true_w, spec: ProblemSpec, solver_cfg: solver.SolverConfig | None = None,
                 feasible_count: int | None = None) -> float:
    """max over feasible x of <true_w, x>."""
    true_w = np.asarray(true_w, dtype=float)
    if feasible_count is None:
        feasible_count = count_feasible(spec)
    if feasible_count <= BRUTE_FORCE_LIMIT:
        return max(utility(true_w, x) for x in enumerate_feasible(spec, BRUTE_FORCE_LIMIT))
    model = solver.LinearModel(name="best-utility")
    for z in range(spec.m):
        model.add_binary(f"x_{z}", obj=float(true_w[z]))
    for a in range(spec.n_attributes):
        terms = [(spec.feature_index(a, v), 1.0) for v in range(spec.attributes[a].cardinality)]
        model.add_row(f"onehot_{a}", terms, solver.EQ, 1.0)
    for i, con in enumerate(spec.constraints):
        model.add_row(f"con_{i}", list(con.coeffs), con.rel, con.rhs)
    res = solver.DEFAULT_BACKEND.solve(model, solver_cfg or solver.SolverConfig(time_limit=120.0))
    if res.status != solver.OPTIMAL:
        raise RuntimeError(f"best-utility solve failed: {res.status}")
    return float(res.objective)


def utility_loss(true_w, recommendation: Configuration, spec: ProblemSpec,
                 best: float | None = None) -> float:
    """Regret of a recommendation under the true weights (>= 0, 0 at an argmax)."""
    if best is None:
        best = best_utility(true_w, spec)
    return max(0.0, best - utility(np.asarray(true_w, dtype=float), recommendation))


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    distribution: UtilityDistribution
    seeds: tuple[int, ...]
    k: int = 2
    T: int = 100
    loop: LoopConfig | None = None
    solver: solver.SolverConfig = field(default_factory=solver.SolverConfig)
    timing: str = TIMING_WALL
    workers: int = 1

    def __post_init__(self):
        if len(self.seeds) < 1:
            raise ValueError("at least one user seed required")
        if self.timing not in (TIMING_WALL, TIMING_NONE):
            raise ValueError("timing must be 'wall' or 'none'")

    @property
    def users(self) -> int:
        return len(self.seeds)

    def loop_config(self) -> LoopConfig:
        if self.loop is not None:
            return replace(self.loop, k=self.k, T=self.T)
        return LoopConfig(k=self.k, T=self.T)


@dataclass
class MetricRow:
    user: int
    iteration: int
    queries: int
    utility_loss: float
    cumulative_seconds: float


@dataclass
class UserRunResult:
    user: int
    rows: list[MetricRow]
    solve_seconds: list[float]
    final_loss: float
    best_utility: float = math.nan
    error: str | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[MetricRow]
    user_results: list[UserRunResult]

    def summary_rows(self) -> list[tuple[int, float, float, float]]:
        """(iteration, median loss, loss std, median cumulative seconds) across users."""
        by_iter: dict[int, list[MetricRow]] = {}
        for row in self.rows:
            by_iter.setdefault(row.iteration, []).append(row)
        out = []
        for t in sorted(by_iter):
            losses = np.array([r.utility_loss for r in by_iter[t]])
            times = np.array([r.cumulative_seconds for r in by_iter[t]])
            out.append((t, float(np.median(losses)), float(np.std(losses)),
                        float(np.median(times))))
        return out

    def median_loss_by_iteration(self) -> dict[int, float]:
        return {t: med for t, med, _, _ in self.summary_rows()}


def run_single_user(cfg: ExperimentConfig, user_index: int) -> UserRunResult:
    """One seeded simulated user through the full loop, with per-iteration
    utility loss of the would-be recommendation."""
    spec = make_spec(cfg.dataset)
    work_spec = reduce_real_attributes(spec) if spec.cost is not None else spec
    seed_seq = np.random.SeedSequence(cfg.seeds[user_index])
    sample_seed, respond_seed = seed_seq.spawn(2)
    true_w = sample_utility(cfg.distribution, work_spec.m, sample_seed)
    user = SimulatedUser(true_w, rng_seed=respond_seed)
    best = best_utility(true_w, work_spec, feasible_count=None)

    losses: list[float] = []
    # recommendation probes always run at a tight gap: a loose experiment
    # gap would let a small-gamma objective leave the configuration choice
    # arbitrary within tolerance
    rec_cfg = replace(cfg.solver, gap_tolerance=min(cfg.solver.gap_tolerance, 1e-4))

    def on_iteration(t, sol, dataset, hp):
        rec_hp = Hyperparameters(max(hp.alpha, 1.0), hp.beta, hp.gamma)
        _, rec_x = milp.recommend(work_spec, dataset, rec_hp, rec_cfg)
        losses.append(utility_loss(true_w, rec_x, work_spec, best=best))

    try:
        trace = run(work_spec, user, cfg.loop_config(), cfg.solver,
                    on_iteration=on_iteration)
    except Exception as exc:  # keep the experiment going; record the failure
        return UserRunResult(user=user_index, rows=[], solve_seconds=[],
                             final_loss=math.nan, error=f"{type(exc).__name__}: {exc}")

    rows, cumulative = [], 0.0
    for rec, loss in zip(trace.records, losses):
        if cfg.timing == TIMING_WALL:
            cumulative += rec.solve_seconds + rec.cv_seconds
        rows.append(MetricRow(user=user_index, iteration=rec.iteration,
                              queries=rec.queries_so_far, utility_loss=loss,
                              cumulative_seconds=cumulative))
    rec_w, rec_x = trace.recommendation
    final_loss = utility_loss(true_w, rec_x, work_spec, best=best)
    return UserRunResult(user=user_index, rows=rows,
                         solve_seconds=[r.solve_seconds for r in trace.records],
                         final_loss=final_loss, best_utility=best)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """All users, optionally in a process pool; row order is deterministic."""
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_single_user, [cfg] * cfg.users, range(cfg.users)))
    else:
        results = [run_single_user(cfg, u) for u in range(cfg.users)]
    results.sort(key=lambda r: r.user)
    rows = [row for res in results for row in res.rows]
    return ExperimentResult(config=cfg, rows=rows, user_results=results)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def metrics_csv(result: ExperimentResult) -> str:
    rows = [(r.user, r.iteration, r.queries, repr(float(r.utility_loss)),
             repr(float(r.cumulative_seconds)))
            for r in sorted(result.rows, key=lambda r: (r.user, r.iteration))]
    return _csv_text(METRICS_HEADER, rows)


def summary_csv(result: ExperimentResult) -> str:
    rows = [(t, repr(med), repr(std), repr(tmed))
            for t, med, std, tmed in result.summary_rows()]
    return _csv_text(SUMMARY_HEADER, rows)


def write_outputs(result: ExperimentResult, out_dir) -> dict[str, Path]:
    """metrics.csv, summary.csv and a spec.json snapshot under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics": out / "metrics.csv",
        "summary": out / "summary.csv",
        "spec": out / "spec.json",
    }
    paths["metrics"].write_text(metrics_csv(result))
    paths["summary"].write_text(summary_csv(result))
    spec = make_spec(result.config.dataset)
    paths["spec"].write_text(json.dumps(dump_problem(spec), indent=1, sort_keys=True) + "\n")
    return paths


def seeds_for(base_seed: int, users: int) -> tuple[int, ...]:
    """Deterministic per-user seeds derived from one base seed."""
    ss = np.random.SeedSequence(base_seed)
    return tuple(int(child.generate_state(1)[0]) for child in ss.spawn(users))
