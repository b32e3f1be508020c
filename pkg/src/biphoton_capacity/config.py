"""Run configuration: a flat JSON document whose keys match :class:`RunConfig` fields."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .experiment import DEFAULT_DWELL, DEFAULT_PAIR_RATE, DEFAULT_ROI_RADIUS, ScanParameters
from .geometry import PlaneMapping, default_extent
from .state import Basis, GaussianBiphotonState


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # state (um, um, nm)
    sigma_c: float = 40.0
    sigma_p: float = 1500.0
    wavelength: float = 650.0
    # grids
    resolutions: list[int] = field(default_factory=lambda: [8, 16, 24])
    capture_fraction: float = 0.8
    misalignment: float = 0.5
    focal_length_position: float = 125.0  # mm
    focal_length_momentum: float = 150.0  # mm
    magnification: float = 1.0
    extent_position_detector: float | None = None  # um at the image-plane detector
    extent_momentum_detector: float | None = None  # um at the Fourier-plane detector
    # simulation
    pair_rate: float = DEFAULT_PAIR_RATE
    dwell: float = DEFAULT_DWELL
    accidental_rate: float = 0.0
    roi_radius: int | None = DEFAULT_ROI_RADIUS
    seed: int | None = None
    # output
    out: str | None = None
    format: str = "csv"

    def validate(self) -> "RunConfig":
        for name in ("sigma_c", "sigma_p", "wavelength", "focal_length_position", "focal_length_momentum",
                     "magnification", "dwell"):
            value = getattr(self, name)
            if value is None:
                raise ConfigError(f"missing required parameter {name}")
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive, got {value!r}")
        for name in ("pair_rate", "accidental_rate", "misalignment"):
            value = getattr(self, name)
            if value is None or not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be non-negative, got {value!r}")
        for name in ("extent_position_detector", "extent_momentum_detector"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if not self.resolutions or any(int(n) != n or n < 1 for n in self.resolutions):
            raise ConfigError(f"resolutions must be a nonempty list of positive integers, got {self.resolutions!r}")
        if not 0 < self.capture_fraction < 1:
            raise ConfigError(f"capture_fraction must lie in (0, 1), got {self.capture_fraction!r}")
        if self.roi_radius is not None and (int(self.roi_radius) != self.roi_radius or self.roi_radius < 0):
            raise ConfigError(f"roi_radius must be a non-negative integer or null, got {self.roi_radius!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        return self

    @property
    def state(self) -> GaussianBiphotonState:
        return GaussianBiphotonState(self.sigma_c, self.sigma_p, self.wavelength)

    @property
    def scan(self) -> ScanParameters:
        return ScanParameters(self.pair_rate, self.dwell, self.accidental_rate, self.roi_radius)

    @property
    def fourier_mapping(self) -> PlaneMapping:
        return PlaneMapping(self.focal_length_momentum, self.wavelength)

    def extent(self, basis: Basis | str) -> float:
        """Grid side in source coordinates (um or rad/um), from detector-plane overrides if given."""
        basis = Basis.parse(basis)
        if basis is Basis.POSITION:
            if self.extent_position_detector is not None:
                return self.extent_position_detector / self.magnification
        elif self.extent_momentum_detector is not None:
            return float(self.fourier_mapping.to_wavenumber(self.extent_momentum_detector))
        return default_extent(self.state, basis, self.capture_fraction)

    def detector_extent(self, basis: Basis | str) -> float:
        """Grid side in um at the physical detector plane."""
        basis = Basis.parse(basis)
        if basis is Basis.POSITION:
            return self.extent(basis) * self.magnification
        return float(self.fourier_mapping.to_detector(self.extent(basis)))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
    data.update(overrides or {})
    unknown = sorted(set(data) - set(FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return RunConfig(**data).validate()
