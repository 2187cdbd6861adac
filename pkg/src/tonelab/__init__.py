"""Colorimetric skin tone toolkit.

Calibrated skin tone measurement ingestion, palette scale construction,
survey administration over HTTP, and statistical analysis of rating
accuracy, consistency, and bias.
"""

from .color import (
    ItaCategory,
    LabColor,
    PolarTone,
    RgbColor,
    chroma_of,
    delta_e,
    hue_of,
    ita_of,
    lab_to_srgb,
    polar_of,
    srgb_to_lab,
)
from .measurement import (
    MeasurementRecord,
    SubjectTone,
    average_bilateral,
    bilateral_delta_e,
    expected_min_error,
    ingest_measurements,
)
from .scales import (
    QuadraticFit,
    Scale,
    Swatch,
    fit_quadratic,
    generate_cst_scale,
    load_scale,
    nearest_swatch,
    save_scale,
)

__version__ = "0.1.0"

__all__ = [
    "ItaCategory",
    "LabColor",
    "PolarTone",
    "RgbColor",
    "chroma_of",
    "delta_e",
    "hue_of",
    "ita_of",
    "lab_to_srgb",
    "polar_of",
    "srgb_to_lab",
    "MeasurementRecord",
    "SubjectTone",
    "average_bilateral",
    "bilateral_delta_e",
    "expected_min_error",
    "ingest_measurements",
    "QuadraticFit",
    "Scale",
    "Swatch",
    "fit_quadratic",
    "generate_cst_scale",
    "load_scale",
    "nearest_swatch",
    "save_scale",
    "__version__",
]
