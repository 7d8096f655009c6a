"""Configuration spaces over one-hot encoded categorical attributes.

A problem is a list of categorical attributes (each contributing one block
of mutually exclusive binary features), a conjunction of linear feasibility
constraints over those features, optional real-valued attributes that depend
linearly on the binary part through a non-negative cost matrix, and bounds
on the utility weights. Utilities are additive: u(x) = <w, x>.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import solver

LE, GE, EQ = solver.LE, solver.GE, solver.EQ


class InvalidAssignment(ValueError):
    """A per-attribute value index is out of range."""


class DimensionError(ValueError):
    """Vector lengths do not line up."""


class SpaceTooLarge(RuntimeError):
    """The feasible space exceeds the caller's enumeration limit."""


class InfeasibleSpec(ValueError):
    """No configuration satisfies the constraints."""


@dataclass(frozen=True)
class Attribute:
    """A categorical attribute with ``cardinality`` possible values."""

    name: str
    cardinality: int
    values: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.cardinality < 1:
            raise ValueError(f"attribute {self.name!r}: cardinality must be >= 1")
        if self.values is not None:
            object.__setattr__(self, "values", tuple(self.values))
            if len(self.values) != self.cardinality:
                raise ValueError(f"attribute {self.name!r}: {len(self.values)} value "
                                 f"names for cardinality {self.cardinality}")

    def value_name(self, v: int) -> str:
        return self.values[v] if self.values is not None else str(v)


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coef * feature) rel rhs`` over binary feature indices."""

    coeffs: tuple[tuple[int, float], ...]
    rel: str
    rhs: float

    def __post_init__(self):
        if self.rel not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "coeffs",
                           tuple(sorted((int(z), float(c)) for z, c in self.coeffs)))
        object.__setattr__(self, "rhs", float(self.rhs))

    @classmethod
    def from_map(cls, mapping, rel, rhs) -> "LinearConstraint":
        return cls(tuple(mapping.items()), rel, rhs)

    def lhs(self, bits) -> float:
        return float(sum(c * bits[z] for z, c in self.coeffs))

    def holds(self, bits, tol: float = 1e-9) -> bool:
        v = self.lhs(bits)
        if self.rel == LE:
            return v <= self.rhs + tol
        if self.rel == GE:
            return v >= self.rhs - tol
        return abs(v - self.rhs) <= tol


def horn_clause(antecedent, consequent) -> LinearConstraint:
    """Encode ``AND(antecedent bits) -> OR(consequent bits)`` as one row.

    Under the True->1 mapping the implication becomes
    ``sum(consequent) - sum(antecedent) >= 1 - len(antecedent)``.
    """
    ant = [int(z) for z in antecedent]
    cons = [int(z) for z in consequent]
    if not cons:
        raise ValueError("consequent must name at least one feature")
    coeffs: dict[int, float] = {}
    for z in cons:
        coeffs[z] = coeffs.get(z, 0.0) + 1.0
    for z in ant:
        coeffs[z] = coeffs.get(z, 0.0) - 1.0
    return LinearConstraint.from_map(coeffs, GE, 1.0 - len(ant))


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Non-negative linear map from binary features to real attributes."""

    entries: np.ndarray
    real_names: tuple[str, ...] = ()

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("cost matrix must be 2-dimensional")
        if (entries < 0).any():
            raise ValueError("cost matrix entries must be non-negative")
        object.__setattr__(self, "entries", entries)
        names = self.real_names or tuple(f"real{i}" for i in range(entries.shape[0]))
        if len(names) != entries.shape[0]:
            raise ValueError("one name per real attribute required")
        object.__setattr__(self, "real_names", tuple(names))

    @property
    def num_real(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class WeightBounds:
    """Componentwise weight intervals, 0 <= lower <= upper."""

    lower: np.ndarray
    upper: np.ndarray
    real_lower: np.ndarray | None = None
    real_upper: np.ndarray | None = None

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape:
            raise DimensionError("lower/upper bound lengths differ")
        if (lo < 0).any() or (hi < lo).any():
            raise ValueError("bounds must satisfy 0 <= lower <= upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if (self.real_lower is None) != (self.real_upper is None):
            raise ValueError("real bounds must be given together")
        if self.real_lower is not None:
            rlo = np.asarray(self.real_lower, dtype=float)
            rhi = np.asarray(self.real_upper, dtype=float)
            if rlo.shape != rhi.shape:
                raise DimensionError("real bound lengths differ")
            if (rlo < 0).any() or (rhi < rlo).any():
                raise ValueError("real bounds must satisfy 0 <= lower <= upper")
            object.__setattr__(self, "real_lower", rlo)
            object.__setattr__(self, "real_upper", rhi)


@dataclass(frozen=True, eq=False)
class Configuration:
    """A full assignment: one-hot bits plus derived real values (if any)."""

    bits: np.ndarray
    reals: np.ndarray | None = None

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int8)
        object.__setattr__(self, "bits", bits)
        if self.reals is not None:
            object.__setattr__(self, "reals", np.asarray(self.reals, dtype=float))

    def key(self) -> tuple[int, ...]:
        return tuple(int(b) for b in self.bits)

    def __eq__(self, other):
        return isinstance(other, Configuration) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Configuration({''.join(str(int(b)) for b in self.bits)})"


class ProblemSpec:
    """Immutable problem definition; validated (incl. feasibility) on creation."""

    def __init__(self, attributes, constraints=(), cost=None, bounds=None,
                 name="problem", check_feasible=True):
        self.name = name
        self.attributes: tuple[Attribute, ...] = tuple(attributes)
        if not self.attributes:
            raise ValueError("at least one attribute required")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        self.constraints: tuple[LinearConstraint, ...] = tuple(constraints)
        self.cost: CostMatrix | None = cost
        cards = [a.cardinality for a in self.attributes]
        self.offsets = np.concatenate([[0], np.cumsum(cards)])
        self.m = int(self.offsets[-1])
        if bounds is None:
            bounds = WeightBounds(np.zeros(self.m), np.ones(self.m))
        self.bounds = bounds
        self._validate()
        if check_feasible:
            check_spec_feasible(self)

    def _validate(self):
        if self.bounds.lower.shape != (self.m,):
            raise DimensionError(f"bounds must have length m={self.m}")
        for con in self.constraints:
            for z, _ in con.coeffs:
                if not 0 <= z < self.m:
                    raise ValueError(f"constraint references feature {z} outside [0, {self.m})")
        if self.cost is not None:
            if self.cost.entries.shape[1] != self.m:
                raise DimensionError("cost matrix must have m columns")
            if self.bounds.real_lower is None:
                raise ValueError("real attribute bounds required when a cost matrix is present")
            if self.bounds.real_lower.shape != (self.cost.num_real,):
                raise DimensionError("one real bound per cost matrix row required")
        elif self.bounds.real_lower is not None:
            raise ValueError("real bounds given but no cost matrix")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(a.cardinality for a in self.attributes)

    def feature_index(self, attr: int, value: int) -> int:
        return int(self.offsets[attr]) + value

    def feature_name(self, z: int) -> str:
        a, v = self.attribute_of_feature(z)
        return f"{self.attributes[a].name}={self.attributes[a].value_name(v)}"

    def attribute_of_feature(self, z: int) -> tuple[int, int]:
        a = int(np.searchsorted(self.offsets, z, side="right")) - 1
        return a, z - int(self.offsets[a])

    def effective_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Weight bounds in the purely binary space (real part folded in)."""
        if self.cost is None:
            return self.bounds.lower, self.bounds.upper
        ct = self.cost.entries.T
        return (self.bounds.lower + ct @ self.bounds.real_lower,
                self.bounds.upper + ct @ self.bounds.real_upper)

    def __repr__(self):
        return (f"ProblemSpec({self.name!r}, m={self.m}, "
                f"attributes={len(self.attributes)}, constraints={len(self.constraints)})")


def encode(spec: ProblemSpec, assignment) -> Configuration:
    """One-hot encode a per-attribute value-index assignment."""
    assignment = list(assignment)
    if len(assignment) != spec.n_attributes:
        raise InvalidAssignment(f"expected {spec.n_attributes} values, got {len(assignment)}")
    bits = np.zeros(spec.m, dtype=np.int8)
    for a, v in enumerate(assignment):
        card = spec.attributes[a].cardinality
        if not 0 <= v < card:
            raise InvalidAssignment(
                f"attribute {spec.attributes[a].name!r}: value {v} not in [0, {card})")
        bits[spec.feature_index(a, v)] = 1
    reals = spec.cost.entries @ bits if spec.cost is not None else None
    return Configuration(bits, reals)


def decode(spec: ProblemSpec, config: Configuration) -> tuple[int, ...]:
    """Recover per-attribute value indices from one-hot bits."""
    out = []
    for a in range(spec.n_attributes):
        lo, hi = int(spec.offsets[a]), int(spec.offsets[a + 1])
        block = config.bits[lo:hi]
        hot = np.flatnonzero(block)
        if hot.size != 1:
            raise InvalidAssignment(f"attribute {spec.attributes[a].name!r} is not one-hot")
        out.append(int(hot[0]))
    return tuple(out)


def utility(w, x: Configuration) -> float:
    """Additive utility <w, x>; covers the real part when present."""
    w = np.asarray(w, dtype=float)
    m = x.bits.shape[0]
    if x.reals is not None and w.shape[0] == m + x.reals.shape[0]:
        return float(w[:m] @ x.bits + w[m:] @ x.reals)
    if w.shape[0] == m:
        return float(w @ x.bits)
    raise DimensionError(f"weight length {w.shape[0]} does not match configuration")


def is_feasible(spec: ProblemSpec, config: Configuration, tol: float = 1e-6) -> bool:
    """One-hot exclusivity plus every linear constraint."""
    for a in range(spec.n_attributes):
        lo, hi = int(spec.offsets[a]), int(spec.offsets[a + 1])
        if int(config.bits[lo:hi].sum()) != 1:
            return False
    return all(con.holds(config.bits, tol) for con in spec.constraints)


def reduce_real_attributes(spec: ProblemSpec) -> ProblemSpec:
    """Fold linearly dependent real attributes into the binary weight space.

    Utilities are preserved: <w_B, x_B> + <w_R, C x_B> = <w_B + C' w_R, x_B>,
    so the reduced problem uses bounds w_B + C' w_R on the combined weights.
    """
    if spec.cost is None:
        raise ValueError("spec has no real attributes to reduce")
    lo, hi = spec.effective_bounds()
    return ProblemSpec(
        attributes=spec.attributes,
        constraints=spec.constraints,
        cost=None,
        bounds=WeightBounds(lo, hi),
        name=f"{spec.name}-reduced",
        check_feasible=False,  # same feasible space as the validated original
    )


def _assignment_batches(cards, batch_size: int = 100_000):
    """Yield (start, value-index matrix) batches covering the raw product space."""
    total = int(np.prod([float(c) for c in cards]))
    strides = np.ones(len(cards), dtype=np.int64)
    for a in range(len(cards) - 2, -1, -1):
        strides[a] = strides[a + 1] * cards[a + 1]
    for start in range(0, total, batch_size):
        idx = np.arange(start, min(start + batch_size, total), dtype=np.int64)
        vals = (idx[:, None] // strides[None, :]) % np.asarray(cards, dtype=np.int64)[None, :]
        yield start, vals


def _feasible_mask(spec: ProblemSpec, vals: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vectorized constraint check on a batch of value-index rows."""
    mask = np.ones(vals.shape[0], dtype=bool)
    for con in spec.constraints:
        lhs = np.zeros(vals.shape[0])
        for z, c in con.coeffs:
            a, v = spec.attribute_of_feature(z)
            lhs += c * (vals[:, a] == v)
        if con.rel == LE:
            mask &= lhs <= con.rhs + tol
        elif con.rel == GE:
            mask &= lhs >= con.rhs - tol
        else:
            mask &= np.abs(lhs - con.rhs) <= tol
    return mask


_RAW_SCAN_CAP = 50_000_000


def count_feasible(spec: ProblemSpec, batch_size: int = 100_000) -> int:
    """Exact feasible-configuration count by constraint-aware enumeration."""
    raw = math.prod(spec.cardinalities)
    if raw > _RAW_SCAN_CAP:
        raise SpaceTooLarge(f"raw space has {raw} assignments; counting cap is {_RAW_SCAN_CAP}")
    if not spec.constraints:
        return raw
    total = 0
    for _, vals in _assignment_batches(spec.cardinalities, batch_size):
        total += int(_feasible_mask(spec, vals).sum())
    return total


def enumerate_feasible(spec: ProblemSpec, limit: int = 100_000) -> list[Configuration]:
    """All feasible configurations, failing fast once ``limit`` is exceeded."""
    raw = math.prod(spec.cardinalities)
    if raw > _RAW_SCAN_CAP:
        raise SpaceTooLarge(f"raw space has {raw} assignments; scanning cap is {_RAW_SCAN_CAP}")
    out: list[Configuration] = []
    for _, vals in _assignment_batches(spec.cardinalities):
        feasible = vals[_feasible_mask(spec, vals)]
        if len(out) + feasible.shape[0] > limit:
            raise SpaceTooLarge(f"feasible count exceeds limit {limit}")
        for row in feasible:
            out.append(encode(spec, row))
    return out


def check_spec_feasible(spec: ProblemSpec):
    """One feasibility solve; raises InfeasibleSpec when the space is empty."""
    model = solver.LinearModel(name=f"{spec.name}-feasibility")
    for z in range(spec.m):
        model.add_binary(f"x_{z}")
    for a in range(spec.n_attributes):
        terms = [(spec.feature_index(a, v), 1.0) for v in range(spec.attributes[a].cardinality)]
        model.add_row(f"onehot_{a}", terms, EQ, 1.0)
    for i, con in enumerate(spec.constraints):
        model.add_row(f"con_{i}", con.coeffs, con.rel, con.rhs)
    result = solver.DEFAULT_BACKEND.solve(model, solver.SolverConfig(time_limit=60.0))
    if result.status != solver.OPTIMAL:
        raise InfeasibleSpec(f"spec {spec.name!r}: no feasible configuration exists")


# ---------------------------------------------------------------------------
# JSON problem files

_TOP_FIELDS = {"name", "attributes", "constraints", "cost", "bounds"}
_ATTR_FIELDS = {"name", "cardinality", "values"}
_CON_FIELDS = {"coeffs", "rel", "rhs"}
_COST_FIELDS = {"rows", "names"}
_BOUND_FIELDS = {"lower", "upper", "realLower", "realUpper"}


def _reject_unknown(obj: dict, allowed: set, where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown field(s) {sorted(unknown)} in {where}")


def load_problem(source) -> ProblemSpec:
    """Load a ProblemSpec from a JSON file path, JSON text, or a dict."""
    if isinstance(source, Path):
        data = json.loads(source.read_text())
    elif isinstance(source, str):
        data = json.loads(source) if source.lstrip().startswith("{") \
            else json.loads(Path(source).read_text())
    else:
        data = source
    _reject_unknown(data, _TOP_FIELDS, "problem")
    attrs = []
    for a in data["attributes"]:
        _reject_unknown(a, _ATTR_FIELDS, f"attribute {a.get('name')!r}")
        attrs.append(Attribute(a["name"], int(a["cardinality"]),
                               tuple(a["values"]) if "values" in a else None))
    cons = []
    for i, c in enumerate(data.get("constraints", [])):
        _reject_unknown(c, _CON_FIELDS, f"constraint #{i}")
        coeffs = {int(z): float(v) for z, v in c["coeffs"].items()}
        cons.append(LinearConstraint.from_map(coeffs, c["rel"], float(c["rhs"])))
    cost = None
    if "cost" in data:
        _reject_unknown(data["cost"], _COST_FIELDS, "cost")
        cost = CostMatrix(np.asarray(data["cost"]["rows"], dtype=float),
                          tuple(data["cost"].get("names", ())))
    b = data["bounds"]
    _reject_unknown(b, _BOUND_FIELDS, "bounds")
    bounds = WeightBounds(
        np.asarray(b["lower"], dtype=float),
        np.asarray(b["upper"], dtype=float),
        np.asarray(b["realLower"], dtype=float) if "realLower" in b else None,
        np.asarray(b["realUpper"], dtype=float) if "realUpper" in b else None,
    )
    return ProblemSpec(attrs, cons, cost, bounds, name=data.get("name", "problem"))


def dump_problem(spec: ProblemSpec) -> dict:
    """Inverse of :func:`load_problem` (modulo float formatting)."""
    data: dict = {
        "name": spec.name,
        "attributes": [
            {"name": a.name, "cardinality": a.cardinality,
             **({"values": list(a.values)} if a.values is not None else {})}
            for a in spec.attributes
        ],
        "constraints": [
            {"coeffs": {str(z): c for z, c in con.coeffs}, "rel": con.rel, "rhs": con.rhs}
            for con in spec.constraints
        ],
        "bounds": {"lower": spec.bounds.lower.tolist(), "upper": spec.bounds.upper.tolist()},
    }
    if spec.cost is not None:
        data["cost"] = {"rows": spec.cost.entries.tolist(), "names": list(spec.cost.real_names)}
        data["bounds"]["realLower"] = spec.bounds.real_lower.tolist()
        data["bounds"]["realUpper"] = spec.bounds.real_upper.tolist()
    return data


def all_configurations(spec: ProblemSpec):
    """Iterate every raw assignment (feasible or not) as Configurations."""
    for assignment in itertools.product(*(range(c) for c in spec.cardinalities)):
        yield encode(spec, assignment)
