"""Vectorized double-double arithmetic.

Only the handful of error-free transformations needed to run Horner's scheme
with double-double coefficients on arrays of complex double arguments. A
double-double number is an unevaluated sum ``hi + lo`` with ``|lo| <= ulp(hi)/2``,
giving roughly 32 significant digits.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    t, f = two_sum(al, bl)
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


def horner(coeff_hi: np.ndarray, coeff_lo: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_k c_k z**k`` with double-double accumulation.

    :arg coeff_hi: leading parts of the real coefficients, lowest order first.
    :arg coeff_lo: trailing parts of the coefficients.
    :arg z: complex arguments (any shape), treated as exact doubles.
    :returns: the polynomial rounded back to complex double.
    """
    z = np.asarray(z, dtype=np.complex128)
    if z.size <= 8:
        # numpy dispatch dominates for a handful of points
        hi = [float(c) for c in coeff_hi]
        lo = [float(c) for c in coeff_lo]
        out = [_horner_scalar(hi, lo, complex(v)) for v in z.ravel()]
        return np.array(out, dtype=np.complex128).reshape(z.shape)

    x = z.real.copy()
    y = z.imag.copy()
    zeros = np.zeros_like(x)

    # p = pr + i pi, each part a double-double
    prh = np.full_like(x, coeff_hi[-1])
    prl = np.full_like(x, coeff_lo[-1])
    pih = zeros.copy()
    pil = zeros.copy()
    for k in range(len(coeff_hi) - 2, -1, -1):
        # (pr + i pi) * (x + i y)
        axh, axl = dd_mul_d(prh, prl, x)
        byh, byl = dd_mul_d(pih, pil, -y)
        ayh, ayl = dd_mul_d(prh, prl, y)
        bxh, bxl = dd_mul_d(pih, pil, x)
        rh, rl = dd_add(axh, axl, byh, byl)
        ih, il = dd_add(ayh, ayl, bxh, bxl)
        prh, prl = dd_add(rh, rl, coeff_hi[k], coeff_lo[k])
        pih, pil = ih, il

    return (prh + prl) + 1j * (pih + pil)


def _horner_scalar(hi: list[float], lo: list[float], z: complex) -> complex:
    x, y = z.real, z.imag
    prh, prl = hi[-1], lo[-1]
    pih = pil = 0.0
    for k in range(len(hi) - 2, -1, -1):
        axh, axl = dd_mul_d(prh, prl, x)
        byh, byl = dd_mul_d(pih, pil, -y)
        ayh, ayl = dd_mul_d(prh, prl, y)
        bxh, bxl = dd_mul_d(pih, pil, x)
        rh, rl = dd_add(axh, axl, byh, byl)
        pih, pil = dd_add(ayh, ayl, bxh, bxl)
        prh, prl = dd_add(rh, rl, hi[k], lo[k])
    return complex(prh + prl, pih + pil)
