"""Thin MILP layer: an incrementally built sparse model, a HiGHS backend
(via scipy.optimize.milp) and LP-format round-tripping.

Models are always maximizations. The backend contract is deliberately small:
continuous/binary variables with bounds, linear rows with <=/>=/= senses,
solver knobs (seed, time limit, relative gap, threads) and primal value
queries on the result.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds as _Bounds
from scipy.optimize import LinearConstraint as _LinearConstraint
from scipy.optimize import milp as _milp

INF = math.inf

LE, GE, EQ = "<=", ">=", "="
_SENSES = (LE, GE, EQ)

# solve statuses
OPTIMAL = "optimal"
TIME_LIMIT = "time_limit"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NO_SOLUTION = "no_solution"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by every solve.

    ``w_max`` overrides the big-M constant used when linearizing
    weight-times-bit products; by default the largest upper weight bound is
    used. The scipy/HiGHS backend is deterministic for a fixed model, so
    ``seed`` is recorded for reproducibility bookkeeping but has no effect
    there; ``threads`` likewise (scipy exposes no thread control).
    """

    time_limit: float = 600.0
    gap_tolerance: float = 1e-4
    threads: int = 1
    seed: int = 0
    w_max: float | None = None
    feasibility_tol: float = 1e-6

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if not 0.0 <= self.gap_tolerance < 1.0:
            raise ValueError("gap_tolerance must lie in [0, 1)")


class LinearModel:
    """A sparse maximization MILP assembled row by row."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.var_names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.binary: list[bool] = []
        self.obj: list[float] = []
        self.row_names: list[str] = []
        self.row_sense: list[str] = []
        self.row_rhs: list[float] = []
        self._rows: list[tuple[int, ...]] = []   # per row: column indices
        self._coefs: list[tuple[float, ...]] = []

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.row_names)

    def add_continuous(self, name, lb=0.0, ub=INF, obj=0.0) -> int:
        self.var_names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.binary.append(False)
        self.obj.append(float(obj))
        return len(self.var_names) - 1

    def add_binary(self, name, obj=0.0) -> int:
        self.var_names.append(name)
        self.lb.append(0.0)
        self.ub.append(1.0)
        self.binary.append(True)
        self.obj.append(float(obj))
        return len(self.var_names) - 1

    def set_objective_coef(self, index: int, coef: float):
        self.obj[index] = float(coef)

    def add_row(self, name, terms, sense, rhs):
        """Append the row ``sum(coef * var) <sense> rhs``.

        ``terms`` is an iterable of (column index, coefficient) pairs.
        """
        if sense not in _SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        idx, coef = [], []
        for j, c in terms:
            if not 0 <= j < self.num_vars:
                raise IndexError(f"row {name!r} references unknown column {j}")
            idx.append(int(j))
            coef.append(float(c))
        self.row_names.append(name)
        self.row_sense.append(sense)
        self.row_rhs.append(float(rhs))
        self._rows.append(tuple(idx))
        self._coefs.append(tuple(coef))

    def row_terms(self, r: int):
        return list(zip(self._rows[r], self._coefs[r]))

    def to_arrays(self):
        """Return (obj, A, row_lo, row_hi, integrality, lb, ub) for the backend."""
        nv, nr = self.num_vars, self.num_rows
        counts = [len(r) for r in self._rows]
        nnz = sum(counts)
        ri = np.repeat(np.arange(nr), counts)
        ci = np.fromiter((j for row in self._rows for j in row), dtype=np.int64, count=nnz)
        dat = np.fromiter((c for row in self._coefs for c in row), dtype=np.float64, count=nnz)
        a = sparse.csc_array((dat, (ri, ci)), shape=(nr, nv))
        rhs = np.asarray(self.row_rhs)
        lo = np.where([s in (GE, EQ) for s in self.row_sense], rhs, -np.inf)
        hi = np.where([s in (LE, EQ) for s in self.row_sense], rhs, np.inf)
        integrality = np.asarray(self.binary, dtype=np.uint8)
        return (np.asarray(self.obj), a, lo, hi, integrality,
                np.asarray(self.lb), np.asarray(self.ub))


@dataclass
class SolveResult:
    status: str
    objective: float | None = None
    values: np.ndarray | None = None
    gap: float | None = None
    node_count: int | None = None

    def value(self, index: int) -> float:
        if self.values is None:
            raise RuntimeError("no primal solution available")
        return float(self.values[index])


class HighsBackend:
    """Solve LinearModels with HiGHS through scipy.optimize.milp."""

    def solve(self, model: LinearModel, config: SolverConfig | None = None) -> SolveResult:
        config = config or SolverConfig()
        obj, a, lo, hi, integrality, lb, ub = model.to_arrays()
        constraints = _LinearConstraint(a, lo, hi) if model.num_rows else ()
        res = _milp(
            -obj,  # scipy minimizes
            constraints=constraints,
            integrality=integrality,
            bounds=_Bounds(lb, ub),
            options={
                "time_limit": config.time_limit,
                "mip_rel_gap": config.gap_tolerance,
                "presolve": True,
            },
        )
        status = {
            0: OPTIMAL,
            1: TIME_LIMIT,
            2: INFEASIBLE,
            3: UNBOUNDED,
        }.get(res.status, NO_SOLUTION)
        if res.x is None:
            if status == OPTIMAL:  # defensive: should not happen
                status = NO_SOLUTION
            return SolveResult(status=status)
        gap = getattr(res, "mip_gap", None)
        nodes = getattr(res, "mip_node_count", None)
        return SolveResult(
            status=status,
            objective=float(-res.fun),
            values=np.asarray(res.x, dtype=float),
            gap=None if gap is None else float(gap),
            node_count=None if nodes is None else int(nodes),
        )


DEFAULT_BACKEND = HighsBackend()


# ---------------------------------------------------------------------------
# LP-format text (CPLEX dialect, restricted to what LinearModel can express)

def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_terms(terms) -> str:
    parts = []
    for name, coef in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(coef))} {name}")
    return " ".join(parts) if parts else "+ 0 zero_"


def write_lp(model: LinearModel) -> str:
    """Serialize the model as LP-format text understood by common solvers."""
    lines = [f"\\ {model.name}", "Maximize"]
    obj_terms = [(model.var_names[j], c) for j, c in enumerate(model.obj) if c != 0.0]
    lines.append(f" obj: {_fmt_terms(obj_terms)}")
    lines.append("Subject To")
    for r in range(model.num_rows):
        terms = [(model.var_names[j], c) for j, c in model.row_terms(r)]
        sense = model.row_sense[r]
        lines.append(f" {model.row_names[r]}: {_fmt_terms(terms)} {sense} {_fmt(model.row_rhs[r])}")
    lines.append("Bounds")
    for j, name in enumerate(model.var_names):
        if model.binary[j]:
            continue
        lo, hi = model.lb[j], model.ub[j]
        if lo == -INF and hi == INF:
            lines.append(f" {name} free")
        elif hi == INF:
            lines.append(f" {name} >= {_fmt(lo)}")
        elif lo == hi:
            lines.append(f" {name} = {_fmt(lo)}")
        else:
            lines.append(f" {_fmt(lo)} <= {name} <= {_fmt(hi)}")
    binaries = [n for j, n in enumerate(model.var_names) if model.binary[j]]
    if binaries:
        lines.append("Binaries")
        for name in binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


_TERM_RE = re.compile(r"([+-])\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s+([A-Za-z_][\w.]*)")


def _parse_terms(text: str):
    text = text.strip()
    if not text.startswith(("+", "-")):
        text = "+ " + text
    terms, consumed = [], 0
    for mt in _TERM_RE.finditer(text):
        coef = float(mt.group(2))
        if mt.group(1) == "-":
            coef = -coef
        if mt.group(3) != "zero_":
            terms.append((mt.group(3), coef))
        consumed = mt.end()
    if text[consumed:].strip():
        raise ValueError(f"cannot parse linear expression: {text!r}")
    return terms


def read_lp(text: str) -> LinearModel:
    """Parse LP text produced by :func:`write_lp` back into a LinearModel."""
    model = LinearModel(name="imported")
    section = None
    obj_terms: list[tuple[str, float]] = []
    rows: list[tuple[str, list, str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: list[str] = []
    order: list[str] = []
    seen: set[str] = set()

    def note(names):
        for nm in names:
            if nm not in seen:
                seen.add(nm)
                order.append(nm)

    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in ("maximize", "max"):
            section = "obj"
            continue
        if low in ("subject to", "st", "s.t."):
            section = "rows"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low in ("binaries", "binary", "bin"):
            section = "bin"
            continue
        if low == "end":
            break
        if section == "obj":
            body = line.split(":", 1)[1] if ":" in line else line
            obj_terms.extend(_parse_terms(body))
            note(n for n, _ in obj_terms)
        elif section == "rows":
            name, body = (line.split(":", 1) + [""])[:2] if ":" in line else ("", line)
            m = re.search(r"(<=|>=|=)\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*$", body)
            if not m:
                raise ValueError(f"cannot parse constraint: {line!r}")
            terms = _parse_terms(body[: m.start()])
            rows.append((name.strip() or f"r{len(rows)}", terms, m.group(1), float(m.group(2))))
            note(n for n, _ in terms)
        elif section == "bounds":
            if line.endswith(" free"):
                nm = line[:-5].strip()
                bounds[nm] = (-INF, INF)
                note([nm])
                continue
            m = re.match(r"^([\d.eE+-]+)\s*<=\s*([A-Za-z_][\w.]*)\s*<=\s*([\d.eE+-]+)$", line)
            if m:
                bounds[m.group(2)] = (float(m.group(1)), float(m.group(3)))
                note([m.group(2)])
                continue
            m = re.match(r"^([A-Za-z_][\w.]*)\s*(<=|>=|=)\s*([\d.eE+-]+)$", line)
            if not m:
                raise ValueError(f"cannot parse bound: {line!r}")
            nm, sense, v = m.group(1), m.group(2), float(m.group(3))
            if sense == "<=":
                bounds[nm] = (0.0, v)
            elif sense == ">=":
                bounds[nm] = (v, INF)
            else:
                bounds[nm] = (v, v)
            note([nm])
        elif section == "bin":
            binaries.append(line)
            note([line])

    bin_set = set(binaries)
    index: dict[str, int] = {}
    for nm in order:
        if nm in bin_set:
            index[nm] = model.add_binary(nm)
        else:
            lo, hi = bounds.get(nm, (0.0, INF))
            index[nm] = model.add_continuous(nm, lb=lo, ub=hi)
    for nm, coef in obj_terms:
        model.set_objective_coef(index[nm], model.obj[index[nm]] + coef)
    for name, terms, sense, rhs in rows:
        model.add_row(name, [(index[nm], c) for nm, c in terms],
                      EQ if sense == "=" else sense, rhs)
    return model
