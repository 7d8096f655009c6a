"""Simulated users: ground-truth utility samplers and a noisy response model.

Choices follow an indifference-augmented Bradley-Terry scheme as a two-stage
draw. For a utility gap du = <w, a - b>, the user first reports indifference
with probability exp(-lambda2 * |du|); otherwise they pick the first option
with the Bradley-Terry probability 1 / (1 + exp(-lambda1 * du)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import Configuration, utility

FIRST = "first"
SECOND = "second"
INDIFFERENT_ANSWER = "indifferent"
VERDICTS = (FIRST, SECOND, INDIFFERENT_ANSWER)

UNIFORM = "uniform"
NORMAL = "normal"
SPARSE_UNIFORM = "sparse-uniform"
SPARSE_NORMAL = "sparse-normal"
DISTRIBUTION_KINDS = (UNIFORM, NORMAL, SPARSE_UNIFORM, SPARSE_NORMAL)

NORMAL_MEAN = 25.0
NORMAL_STD = 25.0 / 3.0


@dataclass(frozen=True)
class ResponseModelParams:
    """lambda1 sharpens strict choices, lambda2 controls how fast the
    indifference probability decays with the utility gap."""

    lambda1: float = 1.0
    lambda2: float = 1.0

    def __post_init__(self):
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("response model parameters must be positive")


@dataclass(frozen=True)
class UtilityDistribution:
    """Ground-truth weight sampler family; sparse kinds zero out a fixed
    fraction of the entries."""

    kind: str
    sparsity: float = 0.8

    def __post_init__(self):
        if self.kind not in DISTRIBUTION_KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not 0.0 <= self.sparsity < 1.0:
            raise ValueError("sparsity must lie in [0, 1)")

    @property
    def is_sparse(self) -> bool:
        return self.kind in (SPARSE_UNIFORM, SPARSE_NORMAL)


def _base_draw(kind: str, m: int, rng: np.random.Generator) -> np.ndarray:
    if kind in (UNIFORM, SPARSE_UNIFORM):
        return rng.uniform(1.0, 100.0, size=m)
    # normal family, truncated at zero to keep weights non-negative
    w = rng.normal(NORMAL_MEAN, NORMAL_STD, size=m)
    while True:
        neg = w < 0
        if not neg.any():
            return w
        w[neg] = rng.normal(NORMAL_MEAN, NORMAL_STD, size=int(neg.sum()))


def sample_utility(dist: UtilityDistribution, m: int, seed) -> np.ndarray:
    """Draw one ground-truth weight vector of length m.

    ``seed`` may be anything np.random.default_rng accepts, including an
    existing Generator. Sparse kinds zero exactly ceil(sparsity * m) entries
    chosen uniformly at random.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    w = _base_draw(dist.kind, m, rng)
    if dist.is_sparse:
        n_zero = math.ceil(dist.sparsity * m)
        zero_at = rng.choice(m, size=n_zero, replace=False)
        w[zero_at] = 0.0
    return w


@dataclass
class SimulatedUser:
    """Answers comparison queries stochastically from hidden true weights."""

    true_weights: np.ndarray
    params: ResponseModelParams = field(default_factory=ResponseModelParams)
    rng_seed: int = 0

    def __post_init__(self):
        self.true_weights = np.asarray(self.true_weights, dtype=float)
        self._rng = np.random.default_rng(self.rng_seed)

    def utility_of(self, x: Configuration) -> float:
        return utility(self.true_weights, x)

    def respond(self, a: Configuration, b: Configuration) -> str:
        du = self.utility_of(a) - self.utility_of(b)
        if self._rng.random() < math.exp(-self.params.lambda2 * abs(du)):
            return INDIFFERENT_ANSWER
        p_first = 1.0 / (1.0 + math.exp(-self.params.lambda1 * du))
        return FIRST if self._rng.random() < p_first else SECOND

    __call__ = respond


def response_probabilities(du: float, params: ResponseModelParams | None = None):
    """Closed-form (P(first), P(second), P(indifferent)) for a utility gap."""
    params = params or ResponseModelParams()
    p_ind = math.exp(-params.lambda2 * abs(du))
    p_first_given = 1.0 / (1.0 + math.exp(-params.lambda1 * du))
    return ((1.0 - p_ind) * p_first_given,
            (1.0 - p_ind) * (1.0 - p_first_given),
            p_ind)


def noiseless_user(true_weights, tol: float = 1e-12):
    """Deterministic responder: strict whenever the utilities differ."""
    w = np.asarray(true_weights, dtype=float)

    def respond(a: Configuration, b: Configuration) -> str:
        du = utility(w, a) - utility(w, b)
        if du > tol:
            return FIRST
        if du < -tol:
            return SECOND
        return INDIFFERENT_ANSWER

    return respond
