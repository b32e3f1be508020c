"""Pixel-pair joint detection probabilities.

The squared biphoton amplitude factorizes over the x and y axes, and per
axis the two photons' coordinates form a bivariate normal.  The joint
probability of a pixel pair is therefore a product of two bivariate
normal rectangle probabilities, one per axis.  A Monte-Carlo sampler
draws pairs from the same density through the independent sum and
difference coordinates and serves as the check on the quadrature.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .geometry import DetectorGrid
from .state import Basis, GaussianBiphotonState, pair_covariance

RHO_LIMIT = 1.0 - 1e-12
TINY = 1e-300
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_TAIL = 10.0  # standard deviations beyond which mass is below 1e-23


def _cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _interval(lo: float, hi: float) -> float:
    """P(lo < Z < hi) for standard normal Z, without cancellation in the tails."""
    if hi <= 0:
        return _cdf(hi) - _cdf(lo)
    if lo >= 0:
        return _cdf(-lo) - _cdf(-hi)
    return 1.0 - _cdf(lo) - _cdf(-hi)


def bivariate_rectangle_probability(rho: float, a_lo: float, a_hi: float, b_lo: float, b_hi: float) -> float:
    """P(a_lo < X < a_hi, b_lo < Y < b_hi) for a standard bivariate normal with correlation ``rho``.

    Integrates the marginal density of X against the conditional interval
    probability of Y given X, adaptively, with breakpoints where the
    conditional window crosses zero.  Infinite bounds are allowed.
    """
    if not abs(rho) <= RHO_LIMIT:
        raise ValueError(f"|rho| must not exceed {RHO_LIMIT}, got {rho!r}")
    if not (a_lo < a_hi and b_lo < b_hi):
        raise ValueError("rectangle bounds must satisfy lo < hi")
    if rho == 0.0:
        return _interval(a_lo, a_hi) * _interval(b_lo, b_hi)

    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    # x-range where the conditional interval is not negligibly 0
    u1, u2 = (b_lo - _TAIL * s) / rho, (b_hi + _TAIL * s) / rho
    lo = max(a_lo, min(u1, u2), -40.0)
    hi = min(a_hi, max(u1, u2), 40.0)
    if lo >= hi:
        return 0.0

    def integrand(x):
        m = rho * x
        return math.exp(-0.5 * x * x) * _INV_SQRT_2PI * _interval((b_lo - m) / s, (b_hi - m) / s)

    # the conditional window switches on/off within ~s/|rho| of each edge; bracket it
    # even when the edge coincides with an integration limit
    width = s / abs(rho)
    centers = [b / rho for b in (b_lo, b_hi) if math.isfinite(b)]
    points = sorted({c + d * width for c in centers for d in (-8.0, -2.0, 0.0, 2.0, 8.0)
                     if lo < c + d * width < hi})
    value, _ = integrate.quad(integrand, lo, hi, points=points or None,
                              epsabs=1e-13, epsrel=1e-11, limit=200)
    return min(max(value, 0.0), 1.0)


def axis_probabilities(rho: float, edges_a: np.ndarray, edges_b: np.ndarray) -> np.ndarray:
    """Matrix of rectangle probabilities over standardized 1D pixel edges."""
    na, nb = len(edges_a) - 1, len(edges_b) - 1
    out = np.empty((na, nb))
    for i in range(na):
        for j in range(nb):
            out[i, j] = bivariate_rectangle_probability(rho, edges_a[i], edges_a[i + 1], edges_b[j], edges_b[j + 1])
    out[out < TINY] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Normalized joint detection probabilities, rows = Alice pixel, columns = Bob pixel."""

    probs: np.ndarray
    captured_fraction: float = 1.0
    basis: Basis = Basis.POSITION
    marginal_a: np.ndarray = field(init=False, repr=False)
    marginal_b: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2:
            raise ValueError("probs must be a 2D matrix")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probs must be finite and non-negative")
        total = p.sum()
        if total <= 0:
            raise ValueError("empty distribution")
        p /= total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "basis", Basis.parse(self.basis))
        for name, axis in (("marginal_a", 1), ("marginal_b", 0)):
            m = p.sum(axis=axis)
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def n_a(self) -> int:
        return self.probs.shape[0]

    @property
    def n_b(self) -> int:
        return self.probs.shape[1]

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self.probs.T, self.captured_fraction, self.basis)

    def to_dict(self) -> dict:
        return {
            "n_a": self.n_a,
            "n_b": self.n_b,
            "basis": self.basis.value,
            "captured_fraction": self.captured_fraction,
            "probs": self.probs.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JointDistribution":
        probs = np.asarray(data["probs"], dtype=float).reshape(data["n_a"], data["n_b"])
        return cls(probs, float(data.get("captured_fraction", 1.0)), data["basis"])

    def write_csv(self, path) -> None:
        rows, cols = np.nonzero(self.probs)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n_a", "n_b", "basis", "captured_fraction"])
            w.writerow([self.n_a, self.n_b, self.basis.value, repr(float(self.captured_fraction))])
            w.writerow(["m", "n", "p"])
            for m, n in zip(rows, cols):
                w.writerow([m, n, repr(float(self.probs[m, n]))])

    @classmethod
    def read_csv(cls, path) -> "JointDistribution":
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            next(r)
            head = next(r)
            n_a, n_b, basis = int(head[0]), int(head[1]), head[2]
            captured = float(head[3]) if len(head) > 3 else 1.0
            next(r)
            probs = np.zeros((n_a, n_b))
            for row in r:
                if row:
                    probs[int(row[0]), int(row[1])] = float(row[2])
        return cls(probs, captured, basis)

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def read_json(cls, path) -> "JointDistribution":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _axis_factor(rho: float, sigma: float, grid_a: DetectorGrid, grid_b: DetectorGrid, axis: int) -> np.ndarray:
    return axis_probabilities(rho, grid_a.edges(axis) / sigma, grid_b.edges(axis) / sigma)


def joint_matrix(state: GaussianBiphotonState, grid_a: DetectorGrid, grid_b: DetectorGrid) -> JointDistribution:
    """Exact pixel-pair probabilities, conditioned on both photons landing in-grid."""
    if grid_a.basis is not grid_b.basis:
        raise ValueError(f"grids disagree on basis: {grid_a.basis.value} vs {grid_b.basis.value}")
    cov = pair_covariance(state, grid_a.basis)
    sigma = cov.sigma_marginal
    px = _axis_factor(cov.rho, sigma, grid_a, grid_b, 0)
    if grid_a.center_offset[1] == grid_a.center_offset[0] and grid_b.center_offset[1] == grid_b.center_offset[0]:
        py = px
    else:
        py = _axis_factor(cov.rho, sigma, grid_a, grid_b, 1)
    captured = float(px.sum() * py.sum())
    if captured <= 0:
        raise ValueError("grids capture no probability mass")
    # flat index = row(y) * n + col(x)
    return JointDistribution(np.kron(py, px), captured, grid_a.basis)


def _draw(rng: np.random.Generator, state: GaussianBiphotonState, basis: Basis, count: int) -> np.ndarray:
    var_diff, var_sum = state.axis_variances(basis)
    u = rng.normal(0.0, math.sqrt(var_diff), size=(count, 2))
    v = rng.normal(0.0, math.sqrt(var_sum), size=(count, 2))
    return np.stack([(v + u) / 2, (v - u) / 2], axis=1)


def sample_pairs(state: GaussianBiphotonState, basis: Basis | str, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` photon pairs; returns shape ``(count, 2, 2)`` as ``[pair, photon(a/b), (x, y)]``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return _draw(np.random.default_rng(seed), state, Basis.parse(basis), int(count))


def _bin_counts(samples: np.ndarray, grid_a: DetectorGrid, grid_b: DetectorGrid) -> np.ndarray:
    ia = grid_a.locate(samples[:, 0, :])
    ib = grid_b.locate(samples[:, 1, :])
    keep = (ia >= 0) & (ib >= 0)
    flat = ia[keep] * grid_b.n_pixels + ib[keep]
    return np.bincount(flat, minlength=grid_a.n_pixels * grid_b.n_pixels).reshape(grid_a.n_pixels, grid_b.n_pixels)


def matrix_from_samples(samples: np.ndarray, grid_a: DetectorGrid, grid_b: DetectorGrid) -> JointDistribution:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 3 or samples.shape[0] == 0:
        raise ValueError("samples must be a nonempty (count, 2, 2) array")
    hist = _bin_counts(samples, grid_a, grid_b)
    inside = hist.sum()
    if inside == 0:
        raise ValueError("no sample landed inside both grids")
    return JointDistribution(hist, inside / samples.shape[0], grid_a.basis)


def sampled_matrix(state: GaussianBiphotonState, grid_a: DetectorGrid, grid_b: DetectorGrid, count: int,
                   seed: int, chunk: int = 1_000_000) -> JointDistribution:
    """Histogram of ``count`` sampled pairs, drawn in chunks to bound memory."""
    rng = np.random.default_rng(seed)
    hist = np.zeros((grid_a.n_pixels, grid_b.n_pixels), dtype=np.int64)
    left = int(count)
    while left > 0:
        k = min(chunk, left)
        hist += _bin_counts(_draw(rng, state, grid_a.basis, k), grid_a, grid_b)
        left -= k
    if hist.sum() == 0:
        raise ValueError("no sample landed inside both grids")
    return JointDistribution(hist, hist.sum() / count, grid_a.basis)
