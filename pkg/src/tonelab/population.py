"""Synthetic skin tone population model.

Quadratic trends of hue and chromaticity against lightness, with parameters
chosen to sit inside published colorimetric ranges for human facial skin
(hue roughly 20..65 degrees, chromaticity roughly 15..30, L* roughly
20..70, with yellowness rising as skin darkens). Used to build simulated
measurement corpora for pipeline validation and as a default corpus for
palette generation demos.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .color import PolarTone

# hue(L) = h0 + h1*L + h2*L^2, degrees
SKIN_HUE_COEFFS = (30.66, 0.68606, -0.010956)
# chroma(L) = c0 + c1*L + c2*L^2
SKIN_CHROMA_COEFFS = (23.28, 0.232, -0.0048)

DEFAULT_L_RANGE = (25.0, 70.0)


def skin_hue(L: np.ndarray | float) -> np.ndarray | float:
    h0, h1, h2 = SKIN_HUE_COEFFS
    return h0 + h1 * L + h2 * np.square(L)


def skin_chroma(L: np.ndarray | float) -> np.ndarray | float:
    c0, c1, c2 = SKIN_CHROMA_COEFFS
    return c0 + c1 * L + c2 * np.square(L)


@dataclass(frozen=True)
class PopulationConfig:
    l_range: tuple[float, float] = DEFAULT_L_RANGE
    hue_sd: float = 2.0
    chroma_sd: float = 1.5


def sample_skin_tones(
    n: int, rng: np.random.Generator, config: PopulationConfig = PopulationConfig()
) -> list[PolarTone]:
    """Draw n synthetic skin tones: uniform L*, noisy quadratic hue/chroma."""
    lo, hi = config.l_range
    L = rng.uniform(lo, hi, size=n)
    hue = skin_hue(L) + rng.normal(0.0, config.hue_sd, size=n)
    chroma = skin_chroma(L) + rng.normal(0.0, config.chroma_sd, size=n)
    chroma = np.clip(chroma, 1.0, None)
    return [PolarTone(float(l), float(h), float(c)) for l, h, c in zip(L, hue, chroma)]
