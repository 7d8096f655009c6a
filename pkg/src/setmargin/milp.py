"""Setwise max-margin learning as a mixed-integer linear program.

Given answered comparison queries, the model jointly finds k weight vectors
and k feasible configurations maximizing a shared margin mu that (a) separates
every observed preference (with slack for inconsistent answers) and (b)
separates each configuration's score under its own weight vector from the
scores of the other configurations in the set.

Products w[i][z] * x[j][z] of continuous weights and binary features are
linearized with auxiliary variables p[i][j][z] bounded by a big-M constant
w_max: the diagonal entries get upper bounds min(w_max * x[i][z], w[i][z]) and
are pushed up by the objective, the off-diagonal entries get lower bounds
max(0, w[i][z] - w_max * (1 - x[j][z])) and are pushed down, so both attain
the product value at any optimum.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import solver
from .problem import Configuration, ProblemSpec, is_feasible
from .solver import SolverConfig

STRICT = "strict"
INDIFFERENT = "indifferent"


class UnboundedRisk(ValueError):
    """k=1 with alpha < 1 lets the margin grow without bound."""


class InfeasibleModel(RuntimeError):
    """The MILP has no feasible point (indicates a broken spec)."""


class NoIncumbent(RuntimeError):
    """The time limit expired before any feasible point was found."""


@dataclass(frozen=True)
class Hyperparameters:
    """Objective trade-offs: alpha on slacks, beta on weight magnitude
    (sparsity), gamma on the utility of the generated configurations."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("hyperparameters must be non-negative")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True, eq=False)
class Preference:
    """One answered comparison; for indifferent answers the order of the
    two configurations carries no meaning."""

    better: Configuration
    worse: Configuration
    kind: str = STRICT

    def __post_init__(self):
        if self.kind not in (STRICT, INDIFFERENT):
            raise ValueError(f"unknown preference kind {self.kind!r}")
        if self.kind == STRICT and self.better == self.worse:
            raise ValueError("strict preference requires distinct configurations")

    def delta(self) -> np.ndarray:
        return self.better.bits.astype(float) - self.worse.bits.astype(float)


class PreferenceDataset:
    """Ordered collection of answered queries."""

    def __init__(self, entries=()):
        self.entries: list[Preference] = list(entries)

    def append(self, pref: Preference):
        self.entries.append(pref)

    def extend(self, prefs):
        self.entries.extend(prefs)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def check_dimension(self, m: int):
        for h, pref in enumerate(self.entries):
            if pref.better.bits.shape[0] != m or pref.worse.bits.shape[0] != m:
                raise ValueError(f"preference #{h} does not match feature count {m}")


@dataclass
class SetMarginModel:
    """Built MILP plus the index bookkeeping needed to read a solution back."""

    model: solver.LinearModel
    spec: ProblemSpec
    k: int
    n: int
    hp: Hyperparameters
    w_max: float
    mu: int
    w_idx: np.ndarray      # (k, m) column indices
    eps_idx: np.ndarray    # (k, n)
    x_idx: np.ndarray      # (k, m)
    p_idx: np.ndarray      # (k, k, m)


@dataclass
class SetMarginSolution:
    """k weight vectors, k configurations, the attained margin, per-preference
    slacks, the recomputed objective, and the product tensor diagnostics."""

    weights: np.ndarray            # (k, m)
    configs: list[Configuration]
    margin: float
    slacks: np.ndarray             # (k, n)
    objective: float
    products: np.ndarray           # (k, k, m)
    status: str = solver.OPTIMAL
    gap: float | None = None
    solve_seconds: float = 0.0

    @property
    def k(self) -> int:
        return self.weights.shape[0]


def build_model(spec: ProblemSpec, dataset: PreferenceDataset, k: int,
                hp: Hyperparameters, cfg: SolverConfig | None = None) -> SetMarginModel:
    """Assemble the setwise max-margin MILP.

    The spec must be purely binary (fold real attributes first). The margin
    is additionally capped at m * w_max so the program stays bounded when no
    ranking rows exist; no useful margin can exceed the utility range.
    """
    cfg = cfg or SolverConfig()
    if k < 1:
        raise ValueError("set size k must be >= 1")
    if k == 1 and hp.alpha < 1:
        raise UnboundedRisk("k=1 requires alpha >= 1 (margin-slack trade is unbounded)")
    if spec.cost is not None:
        raise ValueError("spec has dependent real attributes; reduce it before building")
    m = spec.m
    n = len(dataset)
    dataset.check_dimension(m)
    lo, hi = spec.effective_bounds()
    w_max = cfg.w_max if cfg.w_max is not None else float(hi.max())
    alpha, beta, gamma = hp.as_tuple()

    model = solver.LinearModel(name=f"setmargin-k{k}-n{n}")
    mu = model.add_continuous("mu", lb=0.0, ub=m * w_max, obj=1.0)
    w_idx = np.empty((k, m), dtype=np.int64)
    for i in range(k):
        for z in range(m):
            w_idx[i, z] = model.add_continuous(f"w_{i}_{z}", lb=lo[z], ub=hi[z], obj=-beta)
    eps_idx = np.empty((k, n), dtype=np.int64)
    for i in range(k):
        for h in range(n):
            eps_idx[i, h] = model.add_continuous(f"eps_{i}_{h}", lb=0.0, obj=-alpha)
    x_idx = np.empty((k, m), dtype=np.int64)
    for i in range(k):
        for z in range(m):
            x_idx[i, z] = model.add_binary(f"x_{i}_{z}")
    p_idx = np.empty((k, k, m), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            for z in range(m):
                p_idx[i, j, z] = model.add_continuous(
                    f"p_{i}_{j}_{z}", lb=0.0, ub=w_max, obj=gamma if i == j else 0.0)

    # ranking rows: one per (weight vector, answered query)
    for i in range(k):
        for h, pref in enumerate(dataset):
            d = pref.delta()
            terms = [(int(w_idx[i, z]), float(d[z])) for z in np.flatnonzero(d)]
            if pref.kind == STRICT:
                model.add_row(f"pref_{i}_{h}", terms + [(mu, -1.0), (int(eps_idx[i, h]), 1.0)],
                              solver.GE, 0.0)
            else:
                model.add_row(f"ind_pos_{i}_{h}", terms + [(int(eps_idx[i, h]), -1.0)],
                              solver.LE, 0.0)
                neg = [(z_, -c_) for z_, c_ in terms]
                model.add_row(f"ind_neg_{i}_{h}", neg + [(int(eps_idx[i, h]), -1.0)],
                              solver.LE, 0.0)

    # setwise diversity: each configuration beats the others under its own weights
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            terms = ([(int(p_idx[i, i, z]), 1.0) for z in range(m)]
                     + [(int(p_idx[i, j, z]), -1.0) for z in range(m)]
                     + [(mu, -1.0)])
            model.add_row(f"div_{i}_{j}", terms, solver.GE, 0.0)

    # product linearization: diagonal upper bounds, off-diagonal lower bounds
    for i in range(k):
        for z in range(m):
            model.add_row(f"pdiag_x_{i}_{z}",
                          [(int(p_idx[i, i, z]), 1.0), (int(x_idx[i, z]), -w_max)],
                          solver.LE, 0.0)
            model.add_row(f"pdiag_w_{i}_{z}",
                          [(int(p_idx[i, i, z]), 1.0), (int(w_idx[i, z]), -1.0)],
                          solver.LE, 0.0)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            for z in range(m):
                model.add_row(
                    f"poff_{i}_{j}_{z}",
                    [(int(p_idx[i, j, z]), 1.0), (int(w_idx[i, z]), -1.0),
                     (int(x_idx[j, z]), -w_max)],
                    solver.GE, -w_max)

    # feasibility of every generated configuration
    for i in range(k):
        for a in range(spec.n_attributes):
            terms = [(int(x_idx[i, spec.feature_index(a, v)]), 1.0)
                     for v in range(spec.attributes[a].cardinality)]
            model.add_row(f"onehot_{i}_{a}", terms, solver.EQ, 1.0)
        for c, con in enumerate(spec.constraints):
            terms = [(int(x_idx[i, z]), coef) for z, coef in con.coeffs]
            model.add_row(f"feas_{i}_{c}", terms, con.rel, con.rhs)

    return SetMarginModel(model=model, spec=spec, k=k, n=n, hp=hp, w_max=w_max,
                          mu=mu, w_idx=w_idx, eps_idx=eps_idx, x_idx=x_idx, p_idx=p_idx)


def solve(sm: SetMarginModel, cfg: SolverConfig | None = None,
          backend=None) -> SetMarginSolution:
    """Solve a built model and extract a canonical solution.

    Degenerate optima can leave product variables anywhere between their
    bounds when gamma = 0, so the returned products are canonicalized to the
    values min(w_max * x, w) / max(0, w - w_max * (1 - x)) they attain under
    objective pressure; this maps the solver's point to another optimum and
    makes the reported tensor well defined. The objective is recomputed from
    the canonical point.
    """
    cfg = cfg or SolverConfig()
    backend = backend or solver.DEFAULT_BACKEND
    t0 = time.perf_counter()
    res = backend.solve(sm.model, cfg)
    elapsed = time.perf_counter() - t0
    if res.status == solver.INFEASIBLE:
        raise InfeasibleModel("setwise max-margin model infeasible; the spec is broken "
                              "(preference rows always admit slack)")
    if res.values is None:
        if res.status == solver.TIME_LIMIT:
            raise NoIncumbent(f"no feasible point within {cfg.time_limit}s")
        raise RuntimeError(f"solver failed with status {res.status!r}")

    spec, k, m, n = sm.spec, sm.k, sm.spec.m, sm.n
    lo, hi = spec.effective_bounds()
    vals = res.values
    margin = max(0.0, float(vals[sm.mu]))
    weights = np.clip(vals[sm.w_idx], lo[None, :], hi[None, :])
    slacks = np.maximum(0.0, vals[sm.eps_idx]) if n else np.zeros((k, 0))
    xbits = np.rint(vals[sm.x_idx]).astype(np.int8)
    configs = []
    for i in range(k):
        config = Configuration(xbits[i],
                               spec.cost.entries @ xbits[i] if spec.cost is not None else None)
        if not is_feasible(spec, config, tol=cfg.feasibility_tol):
            raise InfeasibleModel(f"solver returned infeasible configuration #{i}")
        configs.append(config)

    products = np.empty((k, k, m))
    for i in range(k):
        for j in range(k):
            if i == j:
                products[i, i] = np.minimum(sm.w_max * xbits[i], weights[i])
            else:
                products[i, j] = np.maximum(0.0, weights[i] - sm.w_max * (1.0 - xbits[j]))

    alpha, beta, gamma = sm.hp.as_tuple()
    objective = (margin - alpha * float(slacks.sum()) - beta * float(weights.sum())
                 + gamma * float(sum(products[i, i].sum() for i in range(k))))
    return SetMarginSolution(
        weights=weights, configs=configs, margin=margin, slacks=slacks,
        objective=objective, products=products, status=res.status, gap=res.gap,
        solve_seconds=elapsed)


def solve_setmargin(spec: ProblemSpec, dataset: PreferenceDataset, k: int,
                    hp: Hyperparameters, cfg: SolverConfig | None = None,
                    backend=None) -> SetMarginSolution:
    """Convenience wrapper: build then solve."""
    return solve(build_model(spec, dataset, k, hp, cfg), cfg, backend)


def recommend(spec: ProblemSpec, dataset: PreferenceDataset, hp: Hyperparameters,
              cfg: SolverConfig | None = None,
              backend=None) -> tuple[np.ndarray, Configuration]:
    """Final recommendation: the k=1 solve's weight vector and configuration."""
    if hp.alpha < 1:
        raise UnboundedRisk("recommendation requires alpha >= 1")
    sol = solve_setmargin(spec, dataset, 1, hp, cfg, backend)
    return sol.weights[0], sol.configs[0]


def export_debug(sm: SetMarginModel) -> str:
    """LP-format text of the built model (round-trippable by common solvers)."""
    return solver.write_lp(sm.model)
