"""Modified Bessel and Marcum Q functions used by the Rician/Lutz closed forms.

Self-contained implementations (no scipy at runtime) so the closed-form
channel analytics and the test oracles stay on independent code paths.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["bessel_i0", "bessel_i0e", "marcum_q1"]

_SERIES_CUTOFF = 40.0  # power series below, asymptotic expansion above


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Accepts scalars or arrays; relative error below 1e-12 on [0, 700].
    Large arguments go through the exponentially scaled form, so the only
    overflow is the one inherent to I0 itself (x > ~713).
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    out = bessel_i0e(x) * np.exp(np.abs(x))
    return float(out) if scalar else out


def bessel_i0e(x):
    """Exponentially scaled I0: ``exp(-|x|) * I0(x)``."""
    x = np.abs(np.asarray(x, dtype=float))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x <= _SERIES_CUTOFF
    if small.any():
        out[small] = _i0_series(x[small]) * np.exp(-x[small])
    if (~small).any():
        out[~small] = _i0e_asymptotic(x[~small])
    return float(out[0]) if scalar else out


def _i0_series(x: np.ndarray) -> np.ndarray:
    # All terms positive: no cancellation, converges for any finite x.
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 200):
        term = term * q / (k * k)
        total += term
        if (term <= 1e-17 * total).all():
            break
    return total


def _i0e_asymptotic(x: np.ndarray) -> np.ndarray:
    # I0(x) ~ e^x / sqrt(2 pi x) * sum_k prod_j (2j-1)^2 / (k! (8x)^k)
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (2 * k - 1) ** 2 / (8.0 * x * k)
        total += term
        if (term <= 1e-17 * total).all():
            break
    return total / np.sqrt(2.0 * math.pi * x)


def marcum_q1(a: float, b: float) -> float:
    """First-order Marcum Q function ``Q1(a, b)``.

    Canonical Bessel series with exponentially scaled terms; for ``a > b``
    the complementary series is used so the sum stays within [0, 1] without
    overflow regardless of argument size.  Absolute error below 1e-12.
    """
    if a < 0.0 or b < 0.0:
        raise ValueError("marcum_q1 requires a >= 0 and b >= 0")
    if b == 0.0:
        return 1.0
    if a == 0.0:
        return math.exp(-0.5 * b * b)

    # e^{-(a-b)^2/2} multiplies every term; once it underflows the answer is
    # 0 or 1 to better than 1e-300.
    gap = 0.5 * (a - b) ** 2
    if gap > 745.0:
        return 0.0 if b > a else 1.0

    x = a * b
    scale = math.exp(-gap)
    if x < 1e-12:
        # Only the k = 0 term survives at this magnitude.
        return scale if a <= b else 1.0
    if a <= b:
        return min(1.0, scale * _scaled_q_series(a / b, x, from_zero=True))
    return max(0.0, 1.0 - scale * _scaled_q_series(b / a, x, from_zero=False))


def _scaled_q_series(r: float, x: float, from_zero: bool) -> float:
    """Sum r^k * ive_k(x) for k >= 0 (or k >= 1), with 0 < r <= 1."""
    ladder = _ive_ladder(x, _series_order(r, x))
    total = 0.0
    rk = 1.0
    for v in ladder:
        total += rk * v
        rk *= r
    if not from_zero:
        total -= ladder[0]
    return total


def _series_order(r: float, x: float) -> int:
    # ive_k(x) falls off like exp(-k^2 / 2x); r^k adds geometric decay.
    k_bessel = int(9.0 * math.sqrt(x)) + 20
    if r < 0.999:
        k_geom = int(-36.0 / math.log(r)) + 8
        return max(8, min(k_bessel, k_geom))
    return k_bessel


def _ive_ladder(x: float, kmax: int) -> list:
    """Scaled Bessel values ive_k(x) = e^{-x} I_k(x) for k = 0..kmax.

    Miller's downward recurrence (stable for the minimal solution I_k),
    normalized with the identity ``ive_0 + 2 sum_{k>=1} ive_k = 1``.
    Intermediate values are rescaled to dodge overflow.
    """
    start = kmax + 40 + int(0.5 * math.sqrt(x))
    vals = [0.0] * (start + 2)
    vals[start] = 1e-280
    for k in range(start, 0, -1):
        v = vals[k + 1] + (2.0 * k / x) * vals[k]
        if v > 1e280:
            for i in range(k, start + 2):
                vals[i] *= 1e-280
            v *= 1e-280
        vals[k - 1] = v
    norm = vals[0] + 2.0 * math.fsum(vals[1:])
    return [v / norm for v in vals[: kmax + 1]]
