"""Numba-compiled hazard-function evaluation shared by the hot loops.

A hazard is passed to kernels as a flat representation
``(code, coefs, kx, kh, kH, kG, clamp)``:

* ``code``     one of HZ_CONSTANT / HZ_LINEAR / HZ_POLY / HZ_PWL
* ``coefs``    scalar parameters (constant value, linear slope, or ascending
               polynomial coefficients of h)
* ``kx, kh``   knot abscissae and hazard values for piecewise-linear forms
* ``kH, kG``   precomputed cumulative hazard and its integral at the knots
* ``clamp``    True: extend h constantly beyond the last knot;
               False: evaluation past the last knot yields NaN (range error)

The three evaluators return h(u), H(u) = int_0^u h and G(u) = int_0^u H.
"""

from __future__ import annotations

import numpy as np
from numba import njit

HZ_CONSTANT = 0
HZ_LINEAR = 1
HZ_POLY = 2
HZ_PWL = 3


@njit(cache=True, nogil=True)
def _bisect_right(arr, x):
    lo = 0
    hi = arr.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if x < arr[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True, nogil=True)
def hz_value(code, coefs, kx, kh, kH, kG, clamp, u):
    if u < 0.0:
        u = 0.0
    if code == HZ_CONSTANT:
        return coefs[0]
    if code == HZ_LINEAR:
        return coefs[0] * u
    if code == HZ_POLY:
        acc = 0.0
        for k in range(coefs.shape[0] - 1, -1, -1):
            acc = acc * u + coefs[k]
        return acc
    m = kx.shape[0]
    if u >= kx[m - 1]:
        if clamp or u == kx[m - 1]:
            return kh[m - 1]
        return np.nan
    i = _bisect_right(kx, u) - 1
    d = u - kx[i]
    s = (kh[i + 1] - kh[i]) / (kx[i + 1] - kx[i])
    return kh[i] + s * d


@njit(cache=True, nogil=True)
def hz_cumulative(code, coefs, kx, kh, kH, kG, clamp, u):
    if u <= 0.0:
        return 0.0
    if code == HZ_CONSTANT:
        return coefs[0] * u
    if code == HZ_LINEAR:
        return 0.5 * coefs[0] * u * u
    if code == HZ_POLY:
        acc = 0.0
        for k in range(coefs.shape[0] - 1, -1, -1):
            acc = acc * u + coefs[k] / (k + 1.0)
        return acc * u
    m = kx.shape[0]
    if u >= kx[m - 1]:
        if clamp or u == kx[m - 1]:
            return kH[m - 1] + kh[m - 1] * (u - kx[m - 1])
        return np.nan
    i = _bisect_right(kx, u) - 1
    d = u - kx[i]
    s = (kh[i + 1] - kh[i]) / (kx[i + 1] - kx[i])
    return kH[i] + kh[i] * d + 0.5 * s * d * d


@njit(cache=True, nogil=True)
def hz_double_cumulative(code, coefs, kx, kh, kH, kG, clamp, u):
    if u <= 0.0:
        return 0.0
    if code == HZ_CONSTANT:
        return 0.5 * coefs[0] * u * u
    if code == HZ_LINEAR:
        return coefs[0] * u * u * u / 6.0
    if code == HZ_POLY:
        acc = 0.0
        for k in range(coefs.shape[0] - 1, -1, -1):
            acc = acc * u + coefs[k] / ((k + 1.0) * (k + 2.0))
        return acc * u * u
    m = kx.shape[0]
    if u >= kx[m - 1]:
        if clamp or u == kx[m - 1]:
            d = u - kx[m - 1]
            return kG[m - 1] + kH[m - 1] * d + 0.5 * kh[m - 1] * d * d
        return np.nan
    i = _bisect_right(kx, u) - 1
    d = u - kx[i]
    s = (kh[i + 1] - kh[i]) / (kx[i + 1] - kx[i])
    return kG[i] + kH[i] * d + 0.5 * kh[i] * d * d + s * d * d * d / 6.0
