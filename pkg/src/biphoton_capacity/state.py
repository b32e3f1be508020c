"""Double-Gaussian biphoton model and its closed-form quantities.

Each transverse axis carries an identical 1D problem: the difference
coordinate ``x_a - x_b`` and the sum coordinate ``x_a + x_b`` are
independent zero-mean Gaussians.  In the position basis their variances
are ``sigma_c**2`` and ``4 sigma_p**2``; in the momentum basis they are
``1 / (4 sigma_c**2)`` and ``1 / (16 sigma_p**2)``.  Everything below is
read off those four numbers.

Units: positions in um, transverse wavenumbers in rad/um, entropies in bits.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Basis(str, enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"

    @classmethod
    def parse(cls, value: "Basis | str") -> "Basis":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown basis {value!r}; expected 'position' or 'momentum'") from None


@dataclass(frozen=True)
class GaussianBiphotonState:
    """Biphoton state with correlation width ``sigma_c`` and envelope width ``sigma_p`` (um)."""

    sigma_c: float = 40.0
    sigma_p: float = 1500.0
    wavelength: float = 650.0  # nm, only used for Fourier-plane mapping

    def __post_init__(self):
        for name in ("sigma_c", "sigma_p", "wavelength"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    def axis_variances(self, basis: Basis | str) -> tuple[float, float]:
        """Return (difference variance, sum variance) per transverse axis."""
        basis = Basis.parse(basis)
        if basis is Basis.POSITION:
            return self.sigma_c**2, 4.0 * self.sigma_p**2
        return 1.0 / (4.0 * self.sigma_c**2), 1.0 / (16.0 * self.sigma_p**2)


@dataclass(frozen=True)
class PairCovariance:
    var_a: float
    var_b: float
    cov_ab: float
    rho: float

    @property
    def sigma_marginal(self) -> float:
        return math.sqrt(self.var_a)

    @property
    def conditional_variance(self) -> float:
        """Variance of one photon's coordinate given the partner's."""
        return self.var_a * (1.0 - self.rho**2)


def pair_covariance(state: GaussianBiphotonState, basis: Basis | str) -> PairCovariance:
    basis = Basis.parse(basis)
    s_c2, s_p2 = state.sigma_c**2, state.sigma_p**2
    if basis is Basis.POSITION:
        var = (s_c2 + 4.0 * s_p2) / 4.0
        cov = (4.0 * s_p2 - s_c2) / 4.0
        rho = (4.0 * s_p2 - s_c2) / (4.0 * s_p2 + s_c2)
    else:
        var = 1.0 / (16.0 * s_c2) + 1.0 / (64.0 * s_p2)
        cov = (1.0 / (16.0 * s_p2) - 1.0 / (4.0 * s_c2)) / 4.0
        rho = (s_c2 - 4.0 * s_p2) / (4.0 * s_p2 + s_c2)
    return PairCovariance(var_a=var, var_b=var, cov_ab=cov, rho=rho)


def mi_continuous(state: GaussianBiphotonState) -> float:
    """Mutual information of the continuous 2D transverse state, in bits.

    Same value in both bases and independent of any detector.  Per axis the
    bivariate Gaussian gives ``-0.5 log2(1 - rho**2)``; the two axes add.
    """
    ratio = (4.0 * state.sigma_p**2 + state.sigma_c**2) / (4.0 * state.sigma_c * state.sigma_p)
    return 2.0 * math.log2(ratio)


def mi_strong_correlation_limit(state: GaussianBiphotonState) -> float:
    """Large Fedorov-ratio limit of :func:`mi_continuous`: ``log2(sigma_p / sigma_c)**2``."""
    return 2.0 * math.log2(fedorov_ratio(state))


def fedorov_ratio(state: GaussianBiphotonState) -> float:
    return state.sigma_p / state.sigma_c
