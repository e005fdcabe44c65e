"""Double-double (compensated) float64 arithmetic for the Taylor oracle.

Error-free transformations (Knuth two-sum, Dekker split/two-prod) carried
entrywise on numpy arrays. A double-double value is an unevaluated sum
hi + lo with |lo| <= ulp(hi)/2, giving ~32 significant digits; enough to sum
a raw Taylor series for exp(Q) through intermediate terms of size ~1e20
without the cancellation that defeats plain float64.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


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


def dd_from(a):
    a = np.asarray(a, dtype=float)
    return a.copy(), np.zeros_like(a)


def dd_add(x, y):
    s, e = two_sum(x[0], y[0])
    e = e + x[1] + y[1]
    hi, lo = two_sum(s, e)
    return hi, lo


def dd_mul(x, y):
    p, e = two_prod(x[0], y[0])
    e = e + x[0] * y[1] + x[1] * y[0]
    hi, lo = two_sum(p, e)
    return hi, lo


def dd_div_scalar(x, n):
    """Divide a dd array by a modest positive integer."""
    q1 = x[0] / n
    p, e = two_prod(q1, np.float64(n))
    r = (x[0] - p - e) + x[1]
    q2 = r / n
    hi, lo = two_sum(q1, q2)
    return hi, lo


def dd_matmul(x, y):
    """Double-double product of two square dd matrices."""
    n = x[0].shape[0]
    acc_hi = np.zeros_like(x[0])
    acc_lo = np.zeros_like(x[0])
    acc = (acc_hi, acc_lo)
    for k in range(n):
        a = (x[0][:, k : k + 1], x[1][:, k : k + 1])
        b = (y[0][k : k + 1, :], y[1][k : k + 1, :])
        acc = dd_add(acc, dd_mul(a, b))
    return acc


def dd_value(x):
    return x[0] + x[1]
