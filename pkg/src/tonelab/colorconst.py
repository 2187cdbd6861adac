"""Shared sRGB / CIELAB conversion constants.

Every number here is taken from the published color standards, so that all
conversions in the package agree with each other:

* linear RGB -> XYZ matrix: the sRGB specification (IEC 61966-2-1:1999),
  seven-digit form, D65 reference white, 2-degree standard observer.
* D65 white point (X_n, Y_n, Z_n): same source.
* CIELAB f() breakpoint and linear-branch slope: CIE 15 Colorimetry,
  delta = 6/29 convention.

The XYZ -> linear RGB matrix is the numerical inverse of the forward matrix
rather than the independently rounded published inverse, which keeps
round-trip error at the floating point level.
"""

import numpy as np

# linear RGB -> XYZ (rows: X, Y, Z), sRGB / D65 / 2-degree observer
RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)

XYZ_TO_RGB = np.linalg.inv(RGB_TO_XYZ)

# D65 reference white, 2-degree observer, Y normalized to 1
WHITE_D65 = np.array([0.95047, 1.00000, 1.08883])

# CIELAB nonlinearity, delta = 6/29
LAB_DELTA = 6.0 / 29.0
LAB_EPS = LAB_DELTA**3          # threshold on t in f(t)
LAB_SLOPE = 1.0 / (3.0 * LAB_DELTA**2)  # slope of the linear branch
LAB_OFFSET = 4.0 / 29.0

# sRGB transfer function breakpoints
SRGB_GAMMA_THRESHOLD = 0.04045      # encoded-side breakpoint
SRGB_LINEAR_THRESHOLD = 0.0031308   # linear-side breakpoint
