"""Color primitives: sRGB <-> CIELAB, hue, chromaticity, color difference, ITA.

All conversions use the D65 illuminant with the 2-degree standard observer
(see :mod:`tonelab.colorconst`). Color difference is the plain Euclidean
distance in CIELAB. Scalar operations are thin wrappers over vectorized
array versions so bulk work (palette rendering, gamut sweeps) stays fast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .colorconst import (
    LAB_DELTA,
    LAB_EPS,
    LAB_OFFSET,
    LAB_SLOPE,
    RGB_TO_XYZ,
    SRGB_GAMMA_THRESHOLD,
    SRGB_LINEAR_THRESHOLD,
    WHITE_D65,
    XYZ_TO_RGB,
)

# Clamp tolerance on the 0..255 channel scale: absorbs the ~3e-5 channel
# noise from the white point vs matrix row-sum mismatch, far below a step.
GAMUT_TOL = 1e-3

# ITA skin-type bands (degrees), standard six-band typology: the category
# applies when ita is above the bound, with "dark" below the last one.
ITA_BANDS = (
    (55.0, "very light"),
    (41.0, "light"),
    (28.0, "intermediate"),
    (10.0, "tan"),
    (-30.0, "brown"),
)
ITA_DARKEST = "dark"

ITA_REFERENCE_L = 50.0  # fixed lightness reference used by the ITA formula


class UndefinedHueError(ValueError):
    """Hue is undefined for a neutral color (a* = b* = 0)."""


class UndefinedItaError(ValueError):
    """ITA is undefined when b* = 0."""


@dataclass(frozen=True)
class RgbColor:
    """An 8-bit sRGB triple, channels in 0..255."""

    r: int
    g: int
    b: int

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not 0 <= v <= 255:
                raise ValueError(f"channel {name}={v} outside 0..255")

    @property
    def hex(self) -> str:
        return f"#{self.r:02x}{self.g:02x}{self.b:02x}"

    @classmethod
    def from_hex(cls, s: str) -> "RgbColor":
        s = s.lstrip("#")
        if len(s) != 6:
            raise ValueError(f"expected 6 hex digits, got {s!r}")
        return cls(int(s[0:2], 16), int(s[2:4], 16), int(s[4:6], 16))


@dataclass(frozen=True)
class LabColor:
    """A CIELAB color: L* in [0, 100], a* and b* finite."""

    L_star: float
    a_star: float
    b_star: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.L_star <= 100.0):
            raise ValueError(f"L*={self.L_star} outside [0, 100]")
        if not (math.isfinite(self.a_star) and math.isfinite(self.b_star)):
            raise ValueError("a*/b* must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.L_star, self.a_star, self.b_star])


@dataclass(frozen=True)
class PolarTone:
    """A CIELAB color in polar (L*, hue, chroma) form.

    Reconstruction is a* = chroma * cos(hue), b* = chroma * sin(hue) with
    hue in degrees.
    """

    L_star: float
    hue_deg: float
    chroma: float

    def __post_init__(self) -> None:
        if self.chroma < 0:
            raise ValueError(f"chroma={self.chroma} must be >= 0")

    def to_lab(self) -> LabColor:
        h = math.radians(self.hue_deg)
        return LabColor(self.L_star, self.chroma * math.cos(h), self.chroma * math.sin(h))


@dataclass(frozen=True)
class ItaCategory:
    """Individual Typology Angle and its skin-type band."""

    ita_deg: float
    category: str


# ---------------------------------------------------------------------------
# array conversions

def srgb_to_lab_array(rgb: np.ndarray) -> np.ndarray:
    """Convert an array of 8-bit sRGB triples (..., 3) to CIELAB (..., 3)."""
    v = np.asarray(rgb, dtype=float) / 255.0
    linear = np.where(
        v > SRGB_GAMMA_THRESHOLD,
        ((v + 0.055) / 1.055) ** 2.4,
        v / 12.92,
    )
    xyz = linear @ RGB_TO_XYZ.T
    t = xyz / WHITE_D65
    f = np.where(t > LAB_EPS, np.cbrt(t), LAB_SLOPE * t + LAB_OFFSET)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def lab_to_srgb_array(lab: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Convert CIELAB triples (..., 3) to 8-bit sRGB.

    Returns (rgb, out_of_gamut): integer channel values clamped to 0..255
    and a boolean flag per color, true where clamping changed a channel by
    more than floating point noise.
    """
    lab = np.asarray(lab, dtype=float)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    t = np.where(f > LAB_DELTA, f**3, (f - LAB_OFFSET) / LAB_SLOPE)
    xyz = t * WHITE_D65
    linear = xyz @ XYZ_TO_RGB.T
    encoded = np.where(
        linear > SRGB_LINEAR_THRESHOLD,
        1.055 * np.clip(linear, 0.0, None) ** (1.0 / 2.4) - 0.055,
        12.92 * linear,
    )
    channels = encoded * 255.0
    out = (channels < -GAMUT_TOL) | (channels > 255.0 + GAMUT_TOL)
    flags = np.any(out, axis=-1)
    rgb = np.rint(np.clip(channels, 0.0, 255.0)).astype(int)
    return rgb, flags


def delta_e_array(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Euclidean CIELAB distance between arrays of triples."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return np.sqrt(np.sum(d * d, axis=-1))


# ---------------------------------------------------------------------------
# scalar operations

def srgb_to_lab(c: RgbColor) -> LabColor:
    """Convert one 8-bit sRGB color to CIELAB (D65, 2-degree observer)."""
    lab = srgb_to_lab_array(np.array([c.r, c.g, c.b], dtype=float))
    # guard against tiny negative L* from float noise at pure black
    L = min(max(float(lab[0]), 0.0), 100.0)
    return LabColor(L, float(lab[1]), float(lab[2]))


def lab_to_srgb(c: LabColor) -> tuple[RgbColor, bool]:
    """Render a CIELAB color as 8-bit sRGB.

    Returns the clamped color and an out-of-gamut flag; the flag is set
    whenever any channel had to be clamped into 0..255.
    """
    rgb, flag = lab_to_srgb_array(c.as_array())
    return RgbColor(int(rgb[0]), int(rgb[1]), int(rgb[2])), bool(flag)


def hue_of(a_star: float, b_star: float) -> float:
    """Hue angle in degrees of an (a*, b*) pair.

    Implemented with the two-argument arctangent, so any nonzero pair has a
    well-defined hue in (-180, 180]. Human skin lands in (0, 90).
    """
    if a_star == 0.0 and b_star == 0.0:
        raise UndefinedHueError("hue is undefined at a* = b* = 0")
    return math.degrees(math.atan2(b_star, a_star))


def chroma_of(a_star: float, b_star: float) -> float:
    """Chromaticity sqrt(a*^2 + b*^2) of an (a*, b*) pair."""
    return math.hypot(a_star, b_star)


def polar_of(c: LabColor) -> PolarTone:
    """Polar (L*, hue, chroma) form of a CIELAB color."""
    return PolarTone(c.L_star, hue_of(c.a_star, c.b_star), chroma_of(c.a_star, c.b_star))


def delta_e(x: LabColor, y: LabColor) -> float:
    """Euclidean CIELAB color difference between two colors."""
    return float(delta_e_array(x.as_array(), y.as_array()))


def ita_category(ita_deg: float) -> str:
    """Skin-type band for an ITA angle, per the standard six-band typology."""
    for bound, name in ITA_BANDS:
        if ita_deg > bound:
            return name
    return ITA_DARKEST


def ita_of(c: LabColor) -> ItaCategory:
    """Individual Typology Angle of a color, with its skin-type band.

    ITA = (180/pi) * arctan((L* - 50) / b*); undefined when b* = 0.
    """
    if c.b_star == 0.0:
        raise UndefinedItaError("ITA is undefined at b* = 0")
    ita = math.degrees(math.atan((c.L_star - ITA_REFERENCE_L) / c.b_star))
    return ItaCategory(ita, ita_category(ita))
