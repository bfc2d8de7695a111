"""Radiation patterns of the AP array and the reflecting-surface elements.

Conventions
-----------
All patterns are split into a peak power gain G and a normalized power
pattern F with max F = 1, so that the realized gain along a direction is
G * F.  Angles are in degrees throughout.

* Reflecting elements use the cosine-power model F(theta) = cos(theta)^q on
  the front hemisphere (theta in [0, 90]) and 0 behind, with the peak gain
  G = 2*(q+1) fixed by requiring the gain to integrate to 4*pi over the
  sphere.
* The AP is a uniform linear array of M elements on a vertical axis with a
  mechanical/electrical downtilt.  Its pattern depends only on the
  depression angle theta (positive below the horizontal), with the array
  factor normalized so F equals exactly 1 at the tilt angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid

SPEED_OF_LIGHT = 3.0e8  # m/s, the value baked into the UMa breakpoint formula

# Step used for numeric pattern averages; small enough that the trapezoid
# error is far below every tolerance built on top of it.
_QUAD_STEP_DEG = 0.02


def _as_angles(theta_deg, lo: float, hi: float, name: str) -> np.ndarray:
    th = np.asarray(theta_deg, dtype=float)
    if np.any(~np.isfinite(th)):
        raise ValueError(f"{name} must be finite")
    if np.any(th < lo) or np.any(th > hi):
        raise ValueError(f"{name} must lie in [{lo}, {hi}] degrees, got {theta_deg!r}")
    return th


def _scalar_like(value: np.ndarray, template) -> float | np.ndarray:
    if np.ndim(template) == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class IsotropicPattern:
    """Direction-independent pattern with a flat gain (default unit gain)."""

    gain: float = 1.0

    def __post_init__(self):
        if not (self.gain > 0 and math.isfinite(self.gain)):
            raise ValueError("gain must be positive and finite")


@dataclass(frozen=True)
class ErpModel:
    """Element radiation pattern cos(theta)^exponent on the front hemisphere.

    Parameters
    ----------
    exponent : float
        Cosine power q >= 0.  q=1 gives a 6.02 dBi element, q=3 gives
        9.03 dBi.
    """

    exponent: float = 1.0

    def __post_init__(self):
        if not (self.exponent >= 0 and math.isfinite(self.exponent)):
            raise ValueError("exponent must be a finite value >= 0")

    @property
    def max_gain(self) -> float:
        """Peak power gain 2*(q+1), linear."""
        return erp_gain_from_exponent(self.exponent)


def erp_gain_from_exponent(exponent: float) -> float:
    """Peak gain of the cos^q element pattern, linear scale.

    Follows from (1/4pi) * integral of G*cos(theta)^q over the front
    hemisphere being 1.
    """
    if not (exponent >= 0 and math.isfinite(exponent)):
        raise ValueError("exponent must be a finite value >= 0")
    return 2.0 * (exponent + 1.0)


def erp_value(model: ErpModel, theta_deg) -> float | np.ndarray:
    """Normalized element pattern at polar angle theta in [0, 180] degrees.

    cos(theta)^q for theta <= 90, exactly 0 behind the surface.
    """
    th = _as_angles(theta_deg, 0.0, 180.0, "theta_deg")
    c = np.cos(np.radians(th))
    front = th <= 90.0
    # 0**0 == 1 keeps q=0 hemispherically flat including theta=90.
    val = np.where(front, np.maximum(c, 0.0) ** model.exponent, 0.0)
    return _scalar_like(val, theta_deg)


@dataclass(frozen=True)
class ApArrayPattern:
    """Vertical uniform linear array at the AP.

    Parameters
    ----------
    wavelength : float
        Carrier wavelength in meters.
    num_elements : int
        M, number of array elements.
    element_spacing : float or None
        d_e in meters; defaults to half a wavelength.
    tilt_deg : float
        Boresight depression angle below the horizontal, degrees.
    element_max_gain : float
        Peak gain of one element, linear (1.64 ~ half-wave dipole).
    """

    wavelength: float
    num_elements: int = 8
    element_spacing: float | None = None
    tilt_deg: float = 10.0
    element_max_gain: float = 1.64

    def __post_init__(self):
        if not (self.wavelength > 0 and math.isfinite(self.wavelength)):
            raise ValueError("wavelength must be positive")
        if self.num_elements < 1:
            raise ValueError("num_elements must be >= 1")
        if self.element_spacing is None:
            object.__setattr__(self, "element_spacing", self.wavelength / 2.0)
        if not (self.element_spacing > 0):
            raise ValueError("element_spacing must be positive")
        if not (-90.0 < self.tilt_deg <= 90.0):
            raise ValueError("tilt_deg must lie in (-90, 90]")
        if not (self.element_max_gain > 0):
            raise ValueError("element_max_gain must be positive")

    @classmethod
    def for_frequency(cls, f_c_ghz: float, **kwargs) -> "ApArrayPattern":
        """Build the array for a carrier frequency in GHz."""
        if not (f_c_ghz > 0):
            raise ValueError("f_c_ghz must be positive")
        return cls(wavelength=SPEED_OF_LIGHT / (f_c_ghz * 1e9), **kwargs)

    @property
    def peak_gain(self) -> float:
        """Transmit gain along the tilted boresight, M * G_e * cos(tilt)^2."""
        c = math.cos(math.radians(self.tilt_deg))
        return self.num_elements * self.element_max_gain * c * c


def ap_pattern_value(pattern: ApArrayPattern, theta_deg) -> float | np.ndarray:
    """Normalized AP array power pattern at depression angle theta.

    theta is measured from the horizontal, positive downward, and must lie
    in (-90, 90].  The value is cos(theta)^2 * AF(theta)^2 / (M cos(tilt)^2)
    with the standard ULA array factor, which equals exactly 1 at the tilt
    angle.  Off-grating-lobe values stay at or below ~1 (the cos^2 envelope
    can push the true peak a hair above 1 slightly off the tilt).
    """
    th = np.asarray(theta_deg, dtype=float)
    if np.any(~np.isfinite(th)):
        raise ValueError("theta_deg must be finite")
    if np.any(th <= -90.0) or np.any(th > 90.0):
        raise ValueError("theta_deg must lie in (-90, 90] degrees")
    m = pattern.num_elements
    tilt = math.radians(pattern.tilt_deg)
    rad = np.radians(th)
    # Half the inter-element phase shift.
    x = (np.pi * pattern.element_spacing / pattern.wavelength) * (
        np.sin(rad) - math.sin(tilt)
    )
    sx = np.sin(x)
    near_lobe = np.abs(sx) < 1e-9
    safe = np.where(near_lobe, 1.0, sx)
    af2 = np.where(near_lobe, float(m), (np.sin(m * x) / (math.sqrt(m) * safe)) ** 2)
    val = (np.cos(rad) ** 2) * af2 / (m * math.cos(tilt) ** 2)
    return _scalar_like(val, theta_deg)


@lru_cache(maxsize=32)
def _ap_average_cached(pattern: ApArrayPattern) -> float:
    # (1/4pi) * integral of G*F over the sphere; the pattern has no azimuth
    # dependence, so this reduces to 0.5 * integral of G(theta) cos(theta)
    # over depression angles.
    theta = np.arange(-90.0, 90.0 + _QUAD_STEP_DEG, _QUAD_STEP_DEG)
    theta = np.clip(theta, -90.0 + 1e-12, 90.0)
    g = pattern.peak_gain * ap_pattern_value(pattern, theta)
    rad = np.radians(theta)
    return 0.5 * float(trapezoid(g * np.cos(rad), rad))


def pattern_averaged_gain(pattern) -> float:
    """Spherical average (1/4pi) * integral of G*F dOmega.

    Exactly 1.0 for the cos^q element model (that is its normalization) and
    equal to the flat gain for an isotropic pattern; computed by quadrature
    for the AP array.
    """
    if isinstance(pattern, ErpModel):
        return 1.0
    if isinstance(pattern, IsotropicPattern):
        return pattern.gain
    if isinstance(pattern, ApArrayPattern):
        return _ap_average_cached(pattern)
    raise TypeError(f"unsupported pattern type: {type(pattern).__name__}")


def peak_gain(pattern) -> float:
    """Peak power gain G of any supported pattern, linear."""
    if isinstance(pattern, ErpModel):
        return pattern.max_gain
    if isinstance(pattern, IsotropicPattern):
        return pattern.gain
    if isinstance(pattern, ApArrayPattern):
        return pattern.peak_gain
    raise TypeError(f"unsupported pattern type: {type(pattern).__name__}")


def directional_gain(pattern, theta_deg) -> float | np.ndarray:
    """Realized gain G * F(theta) along a direction, linear."""
    if isinstance(pattern, ErpModel):
        return pattern.max_gain * erp_value(pattern, theta_deg)
    if isinstance(pattern, IsotropicPattern):
        val = np.full(np.shape(theta_deg), pattern.gain)
        return _scalar_like(val, theta_deg)
    if isinstance(pattern, ApArrayPattern):
        return pattern.peak_gain * ap_pattern_value(pattern, theta_deg)
    raise TypeError(f"unsupported pattern type: {type(pattern).__name__}")
