"""Precision-generic scalar and 4x4-array helpers.

Every numerical routine in this package runs on one of two carriers:

* numpy float64/complex128 arrays (the default, fast path), or
* numpy object-dtype arrays holding mpmath mpf/mpc scalars (the extended
  path used by the counterexample families, whose spectra fall below
  double-precision resolution).

The helpers here dispatch transcendental functions on the scalar type and
manage the mpmath working precision so both carriers flow through the same
algorithm code.
"""

from __future__ import annotations

import cmath
import contextlib
import math
from fractions import Fraction

import numpy as np
from mpmath import mp, mpc, mpf

_MP_TYPES = (mpf, mpc)
_MIN_PREC = 80
_GUARD_BITS = 64


def is_extended(a) -> bool:
    """True when `a` is an mpmath scalar or an object-dtype array of them."""
    if isinstance(a, np.ndarray):
        return a.dtype == object
    return isinstance(a, _MP_TYPES)


def _prec_of_scalar(x) -> int:
    if isinstance(x, mpc):
        return max(x.real._mpf_[3], x.imag._mpf_[3])
    if isinstance(x, mpf):
        return x._mpf_[3]
    return 53


def precision_for(*arrays) -> int:
    """Working precision (bits) needed to honour the inputs' mantissas."""
    prec = _MIN_PREC
    for a in arrays:
        if a is None:
            continue
        if isinstance(a, np.ndarray) and a.dtype == object:
            for x in a.flat:
                prec = max(prec, _prec_of_scalar(x))
        elif isinstance(a, _MP_TYPES):
            prec = max(prec, _prec_of_scalar(a))
    return prec + _GUARD_BITS


@contextlib.contextmanager
def working_precision(*arrays):
    """Raise mp precision to match the extended inputs; no-op for float64."""
    if any(is_extended(a) for a in arrays if a is not None):
        with mp.workprec(precision_for(*arrays)):
            yield
    else:
        yield


def s_exp(x):
    if isinstance(x, _MP_TYPES):
        return mp.exp(x)
    if isinstance(x, complex):
        return cmath.exp(x)
    return math.exp(x)


def s_log(x):
    """Real logarithm of a positive real scalar."""
    if isinstance(x, _MP_TYPES):
        return mp.log(x)
    return math.log(x)


def s_sqrt(x):
    if isinstance(x, _MP_TYPES):
        return mp.sqrt(x)
    if isinstance(x, complex) or x < 0:
        return cmath.sqrt(x)
    return math.sqrt(x)


def s_cbrt(x):
    """Real cube root, sign-preserving (mp.cbrt of a negative is complex)."""
    if isinstance(x, _MP_TYPES):
        root = mp.cbrt(abs(x))
        return -root if x < 0 else root
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def s_cos(x):
    return mp.cos(x) if isinstance(x, _MP_TYPES) else math.cos(x)


def s_acos(x):
    if isinstance(x, _MP_TYPES):
        return mp.acos(x)
    return math.acos(min(1.0, max(-1.0, x)))


def s_arg(z):
    """Principal argument in (-pi, pi]."""
    if isinstance(z, _MP_TYPES):
        return mp.atan2(z.imag, z.real)
    z = complex(z)
    return math.atan2(z.imag, z.real)


def s_re(z):
    return z.real if isinstance(z, (complex, mpc)) else z


def s_im(z):
    return z.imag if isinstance(z, (complex, mpc)) else z * 0


def make_complex(re, im):
    if isinstance(re, _MP_TYPES) or isinstance(im, _MP_TYPES):
        return mpc(re, im)
    return complex(re, im)


def pi_like(x):
    return +mp.pi if isinstance(x, _MP_TYPES) else math.pi


def one_like(a):
    """Multiplicative unit matching the carrier of array or scalar `a`."""
    if isinstance(a, np.ndarray):
        return a.flat[0] * 0 + 1
    return a * 0 + 1


def eye4(one):
    z = one * 0
    return np.array(
        [[one if i == j else z for j in range(4)] for i in range(4)],
        dtype=object if isinstance(one, _MP_TYPES) else None,
    )


def re_mat(m):
    """Entrywise real part, keeping the carrier."""
    if m.dtype != object:
        return np.real(m).copy()
    return np.array([[s_re(x) for x in row] for row in m], dtype=object)


def im_mat(m):
    if m.dtype != object:
        return np.imag(m).copy()
    return np.array([[s_im(x) for x in row] for row in m], dtype=object)


def conj_vec(v):
    if isinstance(v, np.ndarray) and v.dtype == object:
        return np.array([x.conjugate() for x in v], dtype=object)
    return np.conj(v)


def max_abs(m) -> float:
    return float(max(abs(x) for x in np.asarray(m).flat))


def norm1(m) -> float:
    """Maximum absolute column sum."""
    m = np.asarray(m)
    return float(max(sum(abs(m[i, j]) for i in range(m.shape[0]))
                     for j in range(m.shape[1])))


def to_float_matrix(m) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in np.asarray(m)],
                    dtype=float)


def cast_like(m, like) -> np.ndarray:
    """Matrix `m` on the carrier of `like` (float64 values convert exactly)."""
    m = np.asarray(m)
    like = np.asarray(like)
    if like.dtype != object:
        return m if m.dtype != object else to_float_matrix(m)
    if m.dtype == object:
        return m
    one = one_like(like)
    return np.array([[x * one for x in row] for row in m], dtype=object)


def exact_fraction(x) -> Fraction:
    """Exact rational value of a float or mpf."""
    if isinstance(x, mpf):
        sign, man, exp, _ = x._mpf_
        if man == 0 and exp != 0:
            raise ValueError(f"non-finite value {x!r}")
        f = Fraction(int(man)) * Fraction(2) ** int(exp)
        return -f if sign else f
    return Fraction(float(x))


def all_finite(m) -> bool:
    m = np.asarray(m)
    if m.dtype != object:
        return bool(np.all(np.isfinite(m.view(float))))
    return all(mp.isfinite(x) for x in m.flat)
