"""Palette scale construction, loading, and nearest-swatch lookup.

A palette scale is an ordered list of swatches, index 1 the lightest. The
colorimetric scale is generated by fitting hue and chromaticity as
quadratic functions of L* over a measured corpus and sampling the fits at
evenly spaced L* values. External scales (and generated ones) round-trip
through a JSON definition file carrying both the CIELAB values used for all
math and the rendered sRGB hex used for display.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .color import LabColor, PolarTone, RgbColor, delta_e_array, lab_to_srgb
from .measurement import SubjectTone


class ScaleFormatError(ValueError):
    """A scale definition file failed validation."""


class RankDeficientFitError(ValueError):
    """Too few distinct L* values to identify a quadratic."""


@dataclass(frozen=True)
class QuadraticFit:
    """Least-squares fit of y = beta0 + beta1*L + beta2*L^2."""

    beta0: float
    beta1: float
    beta2: float
    rss: float
    n: int

    def predict(self, L):
        L = np.asarray(L, dtype=float)
        out = self.beta0 + self.beta1 * L + self.beta2 * L * L
        return float(out) if out.ndim == 0 else out

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.beta0, self.beta1, self.beta2)


@dataclass(frozen=True)
class Swatch:
    """One palette entry: exact CIELAB plus its clamped sRGB rendering."""

    index: int
    lab: LabColor
    srgb_hex: str
    out_of_gamut: bool = False


@dataclass(frozen=True)
class Scale:
    """An ordered rating scale, either a color palette or text items."""

    scale_id: str
    name: str
    kind: str  # "palette" | "text"
    swatches: tuple[Swatch, ...] = ()
    items: tuple[str, ...] = ()
    source: str = "external"  # "generated" | "external"

    def __post_init__(self):
        if self.kind not in ("palette", "text"):
            raise ScaleFormatError(f"kind {self.kind!r} not palette or text")
        if self.kind == "palette":
            if not self.swatches:
                raise ScaleFormatError("palette scale needs swatches")
            indices = [s.index for s in self.swatches]
            if indices != list(range(1, len(indices) + 1)):
                raise ScaleFormatError(
                    f"swatch indices {indices} must be contiguous from 1"
                )
            lightest = max(s.lab.L_star for s in self.swatches)
            if self.swatches[0].lab.L_star != lightest:
                raise ScaleFormatError("swatch 1 must be the lightest (highest L*)")
        else:
            if not self.items:
                raise ScaleFormatError("text scale needs items")

    @property
    def size(self) -> int:
        return len(self.swatches) if self.kind == "palette" else len(self.items)

    def swatch(self, index: int) -> Swatch:
        return self.swatches[index - 1]

    def lab_matrix(self) -> np.ndarray:
        return np.array([s.lab.as_array() for s in self.swatches])


def fit_quadratic(points: Sequence[tuple[float, float]]) -> QuadraticFit:
    """Ordinary least squares of y on [1, L, L^2].

    Solved with an orthogonal decomposition (SVD-backed lstsq), so nearly
    collinear designs stay stable. Requires at least three distinct L*
    values; fewer leaves the quadratic unidentified.
    """
    if len(points) < 3:
        raise RankDeficientFitError(f"need >= 3 points, got {len(points)}")
    L = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if len(np.unique(L)) < 3:
        raise RankDeficientFitError("need >= 3 distinct L* values")
    X = np.column_stack([np.ones_like(L), L, L * L])
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return QuadraticFit(float(beta[0]), float(beta[1]), float(beta[2]),
                        float(resid @ resid), len(points))


def _as_polar(corpus: Iterable[SubjectTone | PolarTone], site: str) -> list[PolarTone]:
    out: list[PolarTone] = []
    for item in corpus:
        if isinstance(item, PolarTone):
            out.append(item)
        elif isinstance(item, SubjectTone):
            polar = item.face_polar if site == "face" else item.hand_polar
            if polar is not None:
                out.append(polar)
        else:
            raise TypeError(f"corpus items must be SubjectTone or PolarTone, got {type(item)}")
    return out


def _render(index: int, polar: PolarTone) -> Swatch:
    lab = polar.to_lab()
    rgb, clipped = lab_to_srgb(lab)
    return Swatch(index, lab, rgb.hex, clipped)


def generate_cst_scale(
    corpus: Iterable[SubjectTone | PolarTone],
    k: int = 10,
    l_range: tuple[float, float] = (20.0, 70.0),
    scale_id: str = "cst",
    name: str = "Colorimetric skin tone scale",
    site: str = "face",
) -> tuple[Scale, QuadraticFit, QuadraticFit]:
    """Build a k-swatch colorimetric scale from a measured corpus.

    Fits hue and chromaticity as quadratics of L*, then evaluates both at k
    evenly spaced L* values spanning l_range inclusive, ordered lightest
    first. Swatch colors carry the exact CIELAB values; the hex rendering
    is clamped into gamut for display only.

    Returns the scale together with the two fits that define it.
    """
    if k < 2:
        raise ValueError(f"k={k} must be >= 2")
    polar = _as_polar(corpus, site)
    hue_fit = fit_quadratic([(p.L_star, p.hue_deg) for p in polar])
    chroma_fit = fit_quadratic([(p.L_star, p.chroma) for p in polar])
    l_min, l_max = min(l_range), max(l_range)
    levels = np.linspace(l_max, l_min, k)  # lightest first
    swatches = tuple(
        _render(i + 1, PolarTone(float(L), float(hue_fit.predict(L)), float(chroma_fit.predict(L))))
        for i, L in enumerate(levels)
    )
    scale = Scale(scale_id, name, "palette", swatches=swatches, source="generated")
    return scale, hue_fit, chroma_fit


# ---------------------------------------------------------------------------
# scale definition files

def _swatch_from_json(obj: dict, scale_id: str) -> Swatch:
    try:
        index = int(obj["index"])
        lab = LabColor(float(obj["L"]), float(obj["a"]), float(obj["b"]))
        hex_str = str(obj["hex"]).lower()
    except (KeyError, TypeError, ValueError) as e:
        raise ScaleFormatError(f"scale {scale_id}: bad swatch entry {obj!r}: {e}") from None
    declared = RgbColor.from_hex(hex_str)
    rendered, clipped = lab_to_srgb(lab)
    mismatch = max(
        abs(declared.r - rendered.r), abs(declared.g - rendered.g), abs(declared.b - rendered.b)
    )
    if mismatch > 1:
        raise ScaleFormatError(
            f"scale {scale_id} swatch {index}: hex {hex_str} disagrees with Lab "
            f"rendering {rendered.hex} by {mismatch} channel steps"
        )
    return Swatch(index, lab, hex_str, bool(obj.get("out_of_gamut", clipped)))


def scale_from_json(obj: dict) -> Scale:
    scale_id = str(obj.get("scale_id", ""))
    if not scale_id:
        raise ScaleFormatError("missing scale_id")
    kind = str(obj.get("kind", ""))
    name = str(obj.get("name", scale_id))
    source = str(obj.get("source", "external"))
    if kind == "palette":
        entries = obj.get("swatches")
        if not isinstance(entries, list) or not entries:
            raise ScaleFormatError(f"scale {scale_id}: swatches must be a non-empty list")
        swatches = sorted(
            (_swatch_from_json(e, scale_id) for e in entries), key=lambda s: s.index
        )
        return Scale(scale_id, name, "palette", swatches=tuple(swatches), source=source)
    if kind == "text":
        items = obj.get("items")
        if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
            raise ScaleFormatError(f"scale {scale_id}: items must be a list of strings")
        return Scale(scale_id, name, "text", items=tuple(items), source=source)
    raise ScaleFormatError(f"scale {scale_id}: kind {kind!r} not palette or text")


def scale_to_json(scale: Scale) -> dict:
    obj: dict = {
        "scale_id": scale.scale_id,
        "name": scale.name,
        "kind": scale.kind,
        "source": scale.source,
    }
    if scale.kind == "palette":
        obj["swatches"] = [
            {
                "index": s.index,
                "L": s.lab.L_star,
                "a": s.lab.a_star,
                "b": s.lab.b_star,
                "hex": s.srgb_hex,
                "out_of_gamut": s.out_of_gamut,
            }
            for s in scale.swatches
        ]
    else:
        obj["items"] = list(scale.items)
    return obj


def load_scale(source) -> Scale:
    """Load and validate one scale definition from a JSON file or stream."""
    if hasattr(source, "read"):
        obj = json.load(source)
    else:
        with open(source) as fh:
            obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ScaleFormatError("scale definition must be a JSON object")
    return scale_from_json(obj)


def save_scale(scale: Scale, path) -> None:
    with open(path, "w") as fh:
        json.dump(scale_to_json(scale), fh, indent=2)
        fh.write("\n")


def nearest_swatch(c: LabColor, scale: Scale) -> tuple[int, float]:
    """Index and distance of the scale swatch closest to a color.

    Ties break toward the lower index (the lighter swatch).
    """
    if scale.kind != "palette":
        raise ValueError(f"scale {scale.scale_id} is not a palette scale")
    distances = delta_e_array(scale.lab_matrix(), c.as_array())
    best = int(np.argmin(distances))  # argmin returns the first, so ties go low
    return best + 1, float(distances[best])
