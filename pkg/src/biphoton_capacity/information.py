"""Plug-in entropies, mutual information and their Poisson uncertainties.

All logarithms are base 2.  Cells with zero probability (or zero counts)
contribute nothing, i.e. ``0 log 0 = 0``.

Uncertainties follow first-order propagation of independent ``sqrt(N)``
errors on every count ``N_mn``, with the total ``T`` allowed to move with
each cell.  For any plug-in statistic of the form ``S = E_p[g]`` built
from entropies, the gradient reduces to ``(g_mn - S) / T``, so

    sigma_S**2 = sum_mn N_mn (g_mn - S)**2 / T**2

where ``g`` is the pointwise mutual information ``log2(p_mn / (p_m p_n))``
for the MI and the pointwise surprisal ``-log2 p(a|b)`` for a
conditional entropy.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

SEPARABILITY_BOUND = math.log2(math.pi * math.e)


class Direction(str, enum.Enum):
    A_GIVEN_B = "A|B"
    B_GIVEN_A = "B|A"

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper().replace("_GIVEN_", "|")
        return cls(text)


class Source(str, enum.Enum):
    THEORY_MATRIX = "theory_matrix"
    SIMULATED_COUNTS = "simulated_counts"
    EXTERNAL_COUNTS = "external_counts"


@dataclass(frozen=True)
class MIEstimate:
    value: float
    uncertainty: float
    source: Source = Source.THEORY_MATRIX

    def __post_init__(self):
        if self.uncertainty < 0:
            raise ValueError("uncertainty must be non-negative")

    def to_dict(self) -> dict:
        return {"value": self.value, "uncertainty": self.uncertainty, "source": Source(self.source).value}


@dataclass(frozen=True)
class WitnessResult:
    sum: float
    sigma: float
    direction: Direction = Direction.A_GIVEN_B
    bound: float = SEPARABILITY_BOUND

    @property
    def violated(self) -> bool:
        return self.sum < self.bound

    @property
    def sigmas_of_violation(self) -> float | None:
        if self.sigma > 0:
            return (self.bound - self.sum) / self.sigma
        return None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["direction"] = Direction(self.direction).value
        d["violated"] = self.violated
        d["sigmas_of_violation"] = self.sigmas_of_violation
        return d


def _as_matrix(joint) -> np.ndarray:
    """Probabilities or raw counts as a float matrix (normalization left to callers)."""
    if hasattr(joint, "probs"):
        return np.asarray(joint.probs, dtype=float)
    if hasattr(joint, "counts"):
        return np.asarray(joint.counts, dtype=float)
    return np.asarray(joint, dtype=float)


def _plogp(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def shannon_entropy(dist) -> float:
    """Entropy in bits of a probability vector or matrix (renormalized)."""
    p = np.asarray(dist, dtype=float).ravel()
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    total = p.sum()
    if not total > 0:
        raise ValueError("distribution has no mass")
    return _plogp(p / total)


def _entropies(joint) -> tuple[float, float, float]:
    p = _as_matrix(joint)
    if p.ndim != 2:
        raise ValueError("joint must be a 2D matrix")
    if np.any(p < 0):
        raise ValueError("joint entries must be non-negative")
    total = p.sum()
    if not total > 0:
        raise ValueError("joint has no mass")
    p = p / total
    return _plogp(p.sum(axis=1)), _plogp(p.sum(axis=0)), _plogp(p)


def mutual_information(joint) -> float:
    """H(A) + H(B) - H(A,B) in bits.  Accepts a distribution, count matrix or plain array."""
    h_a, h_b, h_ab = _entropies(joint)
    return h_a + h_b - h_ab


def conditional_entropy(joint, direction=Direction.A_GIVEN_B) -> float:
    h_a, h_b, h_ab = _entropies(joint)
    if Direction.parse(direction) is Direction.A_GIVEN_B:
        return h_ab - h_b
    return h_ab - h_a


def _count_matrix(counts) -> np.ndarray:
    n = _as_matrix(counts)
    if np.any(n < 0):
        raise ValueError("counts must be non-negative")
    if not n.sum() >= 1:
        raise ValueError("total counts must be at least 1")
    return n


def _propagated_sigma(n: np.ndarray, pointwise: np.ndarray, stat: float) -> float:
    total = n.sum()
    mask = n > 0
    var = float((n[mask] * (pointwise[mask] - stat) ** 2).sum()) / total**2
    return math.sqrt(max(var, 0.0))


def _pointwise_mi(n: np.ndarray) -> np.ndarray:
    total = n.sum()
    row = n.sum(axis=1, keepdims=True)
    col = n.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log2(n * total / (row * col))


def mi_poisson_uncertainty(counts) -> float:
    """One-sigma uncertainty of the plug-in MI under independent Poisson counts."""
    n = _count_matrix(counts)
    return _propagated_sigma(n, _pointwise_mi(n), mutual_information(n))


def conditional_entropy_uncertainty(counts, direction=Direction.A_GIVEN_B) -> float:
    n = _count_matrix(counts)
    direction = Direction.parse(direction)
    given = n.sum(axis=0, keepdims=True) if direction is Direction.A_GIVEN_B else n.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        surprisal = -np.log2(n / given)
    return _propagated_sigma(n, surprisal, conditional_entropy(n, direction))


def estimate_mi(counts, source=Source.SIMULATED_COUNTS) -> MIEstimate:
    return MIEstimate(mutual_information(_count_matrix(counts)), mi_poisson_uncertainty(counts), Source(source))


def theory_mi(joint) -> MIEstimate:
    return MIEstimate(mutual_information(joint), 0.0, Source.THEORY_MATRIX)


def max_detectable_mi(n_pixels: int) -> float:
    """MI ceiling ``log2(n_pixels)`` for ``n_pixels`` per detector."""
    if n_pixels < 1:
        raise ValueError("n_pixels must be >= 1")
    return math.log2(n_pixels)


def _is_counts(obj) -> bool:
    return hasattr(obj, "counts") or (
        not hasattr(obj, "probs") and np.issubdtype(np.asarray(obj).dtype, np.integer)
    )


def separability_sum(joint_pos, joint_mom, direction=Direction.A_GIVEN_B) -> WitnessResult:
    """Sum of the position- and momentum-basis conditional entropies, against ``log2(pi e)``.

    Count inputs carry a propagated uncertainty (the two bases are
    independent acquisitions, so variances add); exact distributions give
    ``sigma = 0``.
    """
    direction = Direction.parse(direction)
    for obj, expected in ((joint_pos, "position"), (joint_mom, "momentum")):
        basis = getattr(obj, "basis", None)
        if basis is not None and getattr(basis, "value", basis) != expected:
            raise ValueError(f"expected a {expected}-basis input, got {getattr(basis, 'value', basis)}")
    shape_p, shape_m = _as_matrix(joint_pos).shape, _as_matrix(joint_mom).shape
    if shape_p != shape_m:
        raise ValueError(f"arm dimensions differ between bases: {shape_p} vs {shape_m}")
    total = conditional_entropy(joint_pos, direction) + conditional_entropy(joint_mom, direction)
    var = 0.0
    for obj in (joint_pos, joint_mom):
        if _is_counts(obj):
            var += conditional_entropy_uncertainty(obj, direction) ** 2
    return WitnessResult(total, math.sqrt(var), direction)


def bootstrap_std(counts, statistic=mutual_information, replicates: int = 1000, seed: int = 0) -> float:
    """Standard deviation of ``statistic`` over parametric (per-cell Poisson) resamples.

    Only nonzero cells are resampled; zero-count cells have a zero Poisson mean.
    """
    n = _count_matrix(counts)
    rows, cols = np.nonzero(n)
    lam = n[rows, cols]
    # compact the matrix to occupied rows/columns; empty ones carry no entropy
    ur, ri = np.unique(rows, return_inverse=True)
    uc, ci = np.unique(cols, return_inverse=True)
    rng = np.random.default_rng(seed)
    values = np.empty(replicates)
    for k in range(replicates):
        m = np.zeros((len(ur), len(uc)))
        m[ri, ci] = rng.poisson(lam)
        values[k] = statistic(m) if m.sum() > 0 else 0.0
    return float(values.std(ddof=1))
