"""Interactive elicitation loop.

Each iteration solves the setwise model for k weight vectors and k
configurations, asks the user to compare every unordered pair of generated
configurations, and appends the answers to the preference dataset. Every
``cv_every`` iterations the hyperparameters are re-selected by k-fold
cross-validation minimizing held-out ranking loss. The loop ends with a
final k=1 recommendation.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import milp, solver
from .milp import (Hyperparameters, Preference, PreferenceDataset, STRICT,
                   INDIFFERENT, SetMarginSolution)
from .problem import Configuration, ProblemSpec
from .users import FIRST, SECOND, INDIFFERENT_ANSWER, VERDICTS

DEFAULT_ALPHA_GRID = (20.0, 10.0, 5.0, 1.0)
DEFAULT_BETA_GRID = (10.0, 1.0, 0.1, 0.001)
DEFAULT_GAMMA_GRID = (10.0, 1.0, 0.1, 0.001)

# Starting triple used until the first cross-validation. The weight penalty
# must start well below the configuration reward: a mid-grid beta lets the
# all-zero weight vector dominate after a handful of answers, the margin
# collapses, the solver returns duplicate configurations, and the loop can
# starve before ever collecting the cv_folds answers needed to re-select.
DEFAULT_INITIAL_HP = Hyperparameters(10.0, 0.001, 1.0)


class UserAbort(Exception):
    """Raised by an answer source to stop the loop early."""


@dataclass(frozen=True)
class LoopConfig:
    k: int = 2
    T: int = 100
    cv_every: int = 5
    cv_folds: int = 5
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    beta_grid: tuple[float, ...] = DEFAULT_BETA_GRID
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID
    termination_epsilon: float | None = None
    initial_hp: Hyperparameters = DEFAULT_INITIAL_HP
    cv_seed: int = 17

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.cv_every < 1 or self.cv_folds < 2:
            raise ValueError("cv_every must be >= 1 and cv_folds >= 2")
        if not (self.alpha_grid and self.beta_grid and self.gamma_grid):
            raise ValueError("hyperparameter grids must be non-empty")
        if self.k == 1 and any(a < 1 for a in self.alpha_grid):
            raise ValueError("k=1 forbids alpha < 1 in the grid")

    @property
    def pairs_per_iteration(self) -> int:
        return self.k * (self.k - 1) // 2


@dataclass
class QueryAnswer:
    pair: tuple[Configuration, Configuration]
    verdict: str
    latency: float | None = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")


def answer_to_preferences(answer: QueryAnswer) -> list[Preference]:
    """Translate one verdict into dataset entries."""
    a, b = answer.pair
    if answer.verdict == FIRST:
        return [Preference(a, b, STRICT)]
    if answer.verdict == SECOND:
        return [Preference(b, a, STRICT)]
    return [Preference(a, b, INDIFFERENT)]


def schedule(iteration: int, cfg: LoopConfig) -> bool:
    """True when hyperparameters should be re-selected after this iteration."""
    return iteration % cfg.cv_every == 0


@dataclass
class IterationRecord:
    iteration: int
    queries_so_far: int
    solve_seconds: float
    cv_seconds: float
    hyperparameters: tuple[float, float, float]
    margin: float
    objective: float
    status: str
    configs: list[tuple[int, ...]]
    weight_l1: list[float]

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "queries_so_far": self.queries_so_far,
            "solve_seconds": self.solve_seconds,
            "cv_seconds": self.cv_seconds,
            "hyperparameters": list(self.hyperparameters),
            "margin": self.margin,
            "objective": self.objective,
            "status": self.status,
            "configs": [list(c) for c in self.configs],
            "weight_l1": self.weight_l1,
        }


@dataclass
class ElicitationTrace:
    records: list[IterationRecord] = field(default_factory=list)
    dataset: PreferenceDataset = field(default_factory=PreferenceDataset)
    recommendation: tuple[np.ndarray, Configuration] | None = None
    final_hp: Hyperparameters | None = None
    aborted: bool = False
    terminated_early: bool = False

    @property
    def queries_asked(self) -> int:
        return self.records[-1].queries_so_far if self.records else 0


def write_trace(trace: ElicitationTrace, path) -> None:
    """Serialize per-iteration records as JSON lines."""
    with open(path, "w") as fh:
        for rec in trace.records:
            fh.write(json.dumps(rec.to_dict()) + "\n")


def _ranking_loss(w: np.ndarray, entries: list[Preference],
                  indiff_threshold: float) -> float:
    """Fraction of held-out answers the weight vector gets wrong.

    A strict pair counts as lost when the better option does not score
    strictly higher. An indifferent pair counts as lost when the absolute
    score gap exceeds ``indiff_threshold``.
    """
    if not entries:
        return 0.0
    wrong = 0
    for pref in entries:
        gap = float(w @ pref.delta())
        if pref.kind == STRICT:
            wrong += gap <= 0.0
        else:
            wrong += abs(gap) > indiff_threshold
    return wrong / len(entries)


def _stratified_folds(dataset: PreferenceDataset, folds: int, seed: int) -> list[list[int]]:
    """Round-robin fold assignment, shuffled per preference kind."""
    rng = np.random.default_rng(seed)
    out: list[list[int]] = [[] for _ in range(folds)]
    for kind in (STRICT, INDIFFERENT):
        idx = [h for h, p in enumerate(dataset) if p.kind == kind]
        rng.shuffle(idx)
        for pos, h in enumerate(idx):
            out[pos % folds].append(h)
    return [sorted(f) for f in out]


def cross_validate(dataset: PreferenceDataset, spec: ProblemSpec, cfg: LoopConfig,
                   solver_cfg: solver.SolverConfig, current: Hyperparameters,
                   backend=None) -> Hyperparameters:
    """Pick the grid triple minimizing mean held-out ranking loss.

    Requires at least ``cv_folds`` answers, otherwise the current triple is
    returned unchanged. Each candidate trains a k=1 solve per fold under a
    time cap of one tenth of the configured limit; candidates whose solves
    hit the cap are discarded (ill-conditioned triples are expected to be
    slow and to lose anyway). The indifference loss threshold is the median
    absolute score gap of the training fold's strict pairs, a scale-free
    stand-in since no canonical threshold exists. Ties prefer larger alpha,
    then larger beta (robustness, sparsity), then smaller gamma: ranking
    loss cannot see gamma's effect on the next query set, and a large
    gamma makes duplicate-configuration optima likely once the weight
    polytope narrows, which would starve the loop of new answers.
    """
    if len(dataset) < cfg.cv_folds:
        return current
    folds = _stratified_folds(dataset, cfg.cv_folds, cfg.cv_seed)
    cv_cfg = solver.SolverConfig(
        time_limit=max(solver_cfg.time_limit / 10.0, 0.05),
        gap_tolerance=solver_cfg.gap_tolerance,
        threads=solver_cfg.threads, seed=solver_cfg.seed, w_max=solver_cfg.w_max,
        feasibility_tol=solver_cfg.feasibility_tol)
    best_key, best_hp = None, None
    for a in cfg.alpha_grid:
        for b in cfg.beta_grid:
            for g in cfg.gamma_grid:
                hp = Hyperparameters(a, b, g)
                losses, timed_out = [], False
                for fold in folds:
                    held = [dataset[h] for h in fold]
                    train = [dataset[h] for h in range(len(dataset)) if h not in fold]
                    if not held:
                        continue
                    try:
                        sol = milp.solve_setmargin(spec, PreferenceDataset(train), 1,
                                                   hp, cv_cfg, backend)
                    except (milp.NoIncumbent, milp.UnboundedRisk):
                        timed_out = True
                        break
                    if sol.status != solver.OPTIMAL:
                        timed_out = True
                        break
                    w = sol.weights[0]
                    strict_gaps = [abs(float(w @ p.delta())) for p in train
                                   if p.kind == STRICT]
                    thr = float(np.median(strict_gaps)) if strict_gaps else np.inf
                    losses.append(_ranking_loss(w, held, thr))
                if timed_out or not losses:
                    continue
                key = (float(np.mean(losses)), -a, -b, g)
                if best_key is None or key < best_key:
                    best_key, best_hp = key, hp
    return best_hp if best_hp is not None else current


def _weight_set_diameter(sol: SetMarginSolution) -> float:
    k = sol.k
    if k < 2:
        return 0.0
    return max(float(np.abs(sol.weights[i] - sol.weights[j]).sum())
               for i, j in itertools.combinations(range(k), 2))


def run(spec: ProblemSpec, user, loop_cfg: LoopConfig | None = None,
        solver_cfg: solver.SolverConfig | None = None, backend=None,
        on_iteration=None) -> ElicitationTrace:
    """Run the full elicitation loop against an answer source.

    ``user`` is a callable mapping two Configurations to a verdict in
    {"first", "second", "indifferent"}. Query accounting charges C(k, 2)
    comparisons per iteration; when the solver returns duplicate
    configurations the duplicate pair is not actually asked (it carries no
    information) but the iteration still counts. ``on_iteration`` receives
    (iteration, solution, dataset, hyperparameters) after each iteration's
    answers are appended. Raising UserAbort from the answer source truncates
    the loop; a partial recommendation is still computed.
    """
    loop_cfg = loop_cfg or LoopConfig()
    solver_cfg = solver_cfg or solver.SolverConfig()
    trace = ElicitationTrace()
    dataset = trace.dataset
    hp = loop_cfg.initial_hp
    queries = 0
    per_iter = loop_cfg.pairs_per_iteration
    try:
        for t in range(1, loop_cfg.T + 1):
            hp_used = hp
            sol = milp.solve_setmargin(spec, dataset, loop_cfg.k, hp, solver_cfg, backend)
            for i, j in itertools.combinations(range(loop_cfg.k), 2):
                a, b = sol.configs[i], sol.configs[j]
                if a == b:
                    continue
                verdict = user(a, b)
                dataset.extend(answer_to_preferences(QueryAnswer((a, b), verdict)))
            queries += per_iter
            cv_seconds = 0.0
            if schedule(t, loop_cfg):
                t0 = time.perf_counter()
                hp = cross_validate(dataset, spec, loop_cfg, solver_cfg, hp, backend)
                cv_seconds = time.perf_counter() - t0
            trace.records.append(IterationRecord(
                iteration=t, queries_so_far=queries, solve_seconds=sol.solve_seconds,
                cv_seconds=cv_seconds, hyperparameters=hp_used.as_tuple(),
                margin=sol.margin, objective=sol.objective, status=sol.status,
                configs=[c.key() for c in sol.configs],
                weight_l1=[float(np.abs(w).sum()) for w in sol.weights]))
            if on_iteration is not None:
                on_iteration(t, sol, dataset, hp)
            if (loop_cfg.termination_epsilon is not None and loop_cfg.k >= 2
                    and _weight_set_diameter(sol) < loop_cfg.termination_epsilon):
                trace.terminated_early = True
                break
    except UserAbort:
        trace.aborted = True
    final_hp = Hyperparameters(max(hp.alpha, 1.0), hp.beta, hp.gamma)
    trace.final_hp = final_hp
    # the one-shot final solve gets a larger budget and a tight gap: with a
    # small gamma coefficient a loose relative gap lets the solver leave the
    # recommended configuration essentially arbitrary
    final_cfg = replace(solver_cfg, time_limit=4.0 * solver_cfg.time_limit,
                        gap_tolerance=min(solver_cfg.gap_tolerance, 1e-4))
    trace.recommendation = milp.recommend(spec, dataset, final_hp, final_cfg, backend)
    return trace
