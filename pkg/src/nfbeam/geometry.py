"""ULA description, field boundaries and beamdepth."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

SPEED_OF_LIGHT = 299_792_458.0


class _Unbounded:
    """Marker for an infinite beamdepth or an unfocused (far-field) beam."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __reduce__(self):
        return (_Unbounded, ())


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array.

    ``element_spacing`` defaults to half a wavelength. Other spacings are
    allowed but the Fresnel-form gain assumes lambda/2 and will refuse them.
    """

    carrier_frequency: float = 28e9
    n_elements: int = 256
    element_spacing: float | None = None
    half_wavelength: bool = field(init=False, repr=False, default=True)

    def __post_init__(self):
        if self.n_elements < 2:
            raise ValueError("n_elements must be >= 2")
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be positive")
        if self.element_spacing is None:
            object.__setattr__(self, "element_spacing", self.wavelength / 2)
        if not self.element_spacing > 0:
            raise ValueError("element_spacing must be positive")
        half = math.isclose(self.element_spacing, self.wavelength / 2, rel_tol=1e-9)
        object.__setattr__(self, "half_wavelength", half)
        if not half:
            warnings.warn(
                f"element spacing {self.element_spacing / self.wavelength:.4g} lambda "
                "is not lambda/2; Fresnel-form gains are unavailable",
                stacklevel=2,
            )

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def aperture(self) -> float:
        # N*d, not (N-1)*d: gives the 350 m Rayleigh distance at N=256, 28 GHz
        return self.n_elements * self.element_spacing

    @property
    def rayleigh_distance(self) -> float:
        return 2 * self.aperture**2 / self.wavelength

    def fingerprint(self) -> dict:
        return {
            "frequency_hz": self.carrier_frequency,
            "n_elements": self.n_elements,
            "spacing_over_lambda": self.element_spacing / self.wavelength,
            "aperture_m": self.aperture,
            "rayleigh_m": self.rayleigh_distance,
        }


@dataclass(frozen=True)
class PolarPoint:
    """Location seen from the array centre: spatial angle (rad) and range (m)."""

    angle: float
    range: float

    def __post_init__(self):
        if not -math.pi / 2 < self.angle < math.pi / 2:
            raise ValueError(f"angle {self.angle} outside (-pi/2, pi/2)")
        if not (self.range > 0 and math.isfinite(self.range)):
            raise ValueError(f"range {self.range} must be positive and finite")

    @classmethod
    def from_sin(cls, sin_theta: float, range_m: float) -> "PolarPoint":
        return cls(math.asin(sin_theta), range_m)

    @property
    def sin(self) -> float:
        return math.sin(self.angle)

    def to_xy(self) -> tuple[float, float]:
        """(x along the array axis, y broadside) in metres."""
        return self.range * math.sin(self.angle), self.range * math.cos(self.angle)

    @classmethod
    def from_xy(cls, x: float, y: float) -> "PolarPoint":
        return cls(math.atan2(x, y), math.hypot(x, y))


def rayleigh_distance(cfg: ArrayConfig) -> float:
    return cfg.rayleigh_distance


def ebrd(cfg: ArrayConfig, theta: float) -> float:
    """Effective beamfocused Rayleigh distance, ``R_d cos^2(theta) / 10``."""
    return cfg.rayleigh_distance / 10 * math.cos(theta) ** 2


def beamdepth(cfg: ArrayConfig, theta: float, r_focus: float):
    """3 dB beamdepth of a beam focused at ``(theta, r_focus)``.

    Returns ``UNBOUNDED`` once the focus reaches the EBRD, where the
    far edge of the 3 dB interval runs off to infinity.
    """
    if r_focus <= 0:
        raise ValueError("r_focus must be positive")
    a = cfg.rayleigh_distance * math.cos(theta) ** 2
    if 10 * r_focus >= a:
        return UNBOUNDED
    return r_focus * a / (a - 10 * r_focus) - r_focus * a / (a + 10 * r_focus)


def path_loss_amplitude(cfg: ArrayConfig, r: float) -> float:
    """Free-space amplitude factor ``lambda / (4 pi r)``."""
    if r <= 0:
        raise ValueError("r must be positive")
    return cfg.wavelength / (4 * math.pi * r)
