"""Pixelated detector grids in image-plane or Fourier-plane coordinates.

A grid is square, ``n x n`` pixels, and lives directly in source
coordinates: um for the position basis, rad/um for the momentum basis.
Pixels are flattened row-major, ``index = row * n + col`` with ``row``
along y and ``col`` along x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfinv

from .state import Basis, GaussianBiphotonState, pair_covariance


@dataclass(frozen=True)
class DetectorGrid:
    n_per_axis: int
    pitch: float
    center_offset: tuple[float, float] = (0.0, 0.0)  # (x, y) in pixels
    basis: Basis = Basis.POSITION

    def __post_init__(self):
        if int(self.n_per_axis) != self.n_per_axis or self.n_per_axis < 1:
            raise ValueError(f"n_per_axis must be a positive integer, got {self.n_per_axis!r}")
        if not (math.isfinite(self.pitch) and self.pitch > 0):
            raise ValueError(f"pitch must be positive, got {self.pitch!r}")
        object.__setattr__(self, "n_per_axis", int(self.n_per_axis))
        object.__setattr__(self, "center_offset", tuple(float(o) for o in self.center_offset))
        object.__setattr__(self, "basis", Basis.parse(self.basis))

    @property
    def extent(self) -> float:
        return self.n_per_axis * self.pitch

    @property
    def n_pixels(self) -> int:
        return self.n_per_axis**2

    def edges(self, axis: int = 0) -> np.ndarray:
        """Pixel boundaries along ``axis`` (0 = x, 1 = y), length ``n + 1``."""
        m = np.arange(self.n_per_axis + 1)
        return -self.extent / 2 + (m + self.center_offset[axis]) * self.pitch

    def flat_index(self, pixel: tuple[int, int]) -> int:
        row, col = pixel
        return row * self.n_per_axis + col

    def unflatten(self, index: int) -> tuple[int, int]:
        return divmod(int(index), self.n_per_axis)

    def contains(self, pixel: tuple[int, int]) -> bool:
        return all(0 <= int(p) < self.n_per_axis for p in pixel)

    def locate(self, coords: np.ndarray) -> np.ndarray:
        """Flat pixel index for each ``(x, y)`` row of ``coords``; -1 outside the grid."""
        coords = np.asarray(coords, dtype=float)
        cols = np.floor((coords[:, 0] - self.edges(0)[0]) / self.pitch).astype(np.int64)
        rows = np.floor((coords[:, 1] - self.edges(1)[0]) / self.pitch).astype(np.int64)
        inside = (cols >= 0) & (cols < self.n_per_axis) & (rows >= 0) & (rows < self.n_per_axis)
        return np.where(inside, rows * self.n_per_axis + cols, -1)


@dataclass(frozen=True)
class PlaneMapping:
    """Fourier-plane detector coordinate <-> source transverse wavenumber.

    ``k = scale * x_det`` with ``scale = 2 pi / (wavelength * focal_length)``.
    """

    focal_length: float  # mm
    wavelength: float  # nm

    def __post_init__(self):
        if self.focal_length <= 0 or self.wavelength <= 0:
            raise ValueError("focal_length and wavelength must be positive")

    @property
    def scale(self) -> float:
        """rad/um of source wavenumber per um at the detector."""
        return 2 * math.pi / ((self.wavelength * 1e-3) * (self.focal_length * 1e3))

    def to_wavenumber(self, x_detector):
        return np.asarray(x_detector) * self.scale

    def to_detector(self, k):
        return np.asarray(k) / self.scale


def build_grid(n_per_axis: int, extent: float, center_offset=(0.0, 0.0), basis: Basis | str = Basis.POSITION) -> DetectorGrid:
    if n_per_axis < 1:
        raise ValueError(f"n_per_axis must be >= 1, got {n_per_axis}")
    if not (extent > 0):
        raise ValueError(f"extent must be positive, got {extent}")
    offset = tuple(center_offset) if np.ndim(center_offset) else (float(center_offset),) * 2
    return DetectorGrid(n_per_axis, extent / n_per_axis, offset, Basis.parse(basis))


def default_extent(state: GaussianBiphotonState, basis: Basis | str, capture_fraction: float = 0.8) -> float:
    """Side of the centered square holding ``capture_fraction`` of one photon's marginal.

    Solves ``erf(W / (2 sqrt(2) sigma))**2 = capture_fraction`` where sigma is
    the per-axis marginal standard deviation.
    """
    if not 0 < capture_fraction < 1:
        raise ValueError(f"capture_fraction must lie in (0, 1), got {capture_fraction}")
    sigma = pair_covariance(state, basis).sigma_marginal
    return float(2 * math.sqrt(2) * sigma * erfinv(math.sqrt(capture_fraction)))


def _partner(m: int, n: int, correlation_sign: int) -> int:
    return m if correlation_sign > 0 else n - 1 - m


def roi_pixels(pixel_a: tuple[int, int], grid_b: DetectorGrid, radius_pixels: int, correlation_sign: int) -> frozenset:
    """Bob pixels within ``radius_pixels`` (Chebyshev) of Alice's predicted partner."""
    n = grid_b.n_per_axis
    if not grid_b.contains(pixel_a):
        raise IndexError(f"pixel {pixel_a} outside a {n}x{n} grid")
    if radius_pixels < 0:
        raise ValueError("radius_pixels must be >= 0")
    center = [_partner(int(p), n, correlation_sign) for p in pixel_a]
    spans = [range(max(0, c - radius_pixels), min(n, c + radius_pixels + 1)) for c in center]
    return frozenset((r, c) for r in spans[0] for c in spans[1])


def roi_mask(n_per_axis: int, radius_pixels: int | None, correlation_sign: int) -> np.ndarray:
    """Boolean (n^2, n^2) scan mask over flattened pixel pairs; all True when radius is None."""
    n = n_per_axis
    if radius_pixels is None:
        return np.ones((n * n, n * n), dtype=bool)
    if radius_pixels < 0:
        raise ValueError("radius_pixels must be >= 0")
    m = np.arange(n)
    partner = _partner(m, n, correlation_sign)
    axis = np.abs(partner[:, None] - m[None, :]) <= radius_pixels
    return np.kron(axis, axis)


def correlation_sign(state: GaussianBiphotonState, basis: Basis | str) -> int:
    return 1 if pair_covariance(state, basis).rho >= 0 else -1
