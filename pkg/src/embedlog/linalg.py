"""Fixed-size 4x4 linear algebra for row-stochastic matrices.

Everything here is closed-form: 4x4 products and adjugate inverses, an
eigendecomposition that deflates the known eigenvalue 1 analytically and
solves the remaining cubic exactly, a scaling-and-squaring matrix
exponential, and a compensated Taylor oracle used to cross-check it.

All routines accept float64/complex128 numpy arrays or object-dtype arrays
of mpmath scalars and answer in the same carrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _dd
from ._scalars import (
    all_finite,
    eye4,
    is_extended,
    make_complex,
    max_abs,
    norm1,
    one_like,
    re_mat,
    s_acos,
    s_cbrt,
    s_cos,
    s_sqrt,
    working_precision,
)
from .errors import RowSumViolation, SingularMatrix, SpectrumOutOfClass
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "Spectrum",
    "mat_mul",
    "mat_inverse",
    "eigendecompose_markov",
    "expm",
    "oracle_expm",
    "taylor_tail_bound",
]


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigendecomposition (1, lam, mu, conj(mu)) of a Markov matrix.

    The first eigenvalue is 1 by construction and the first column of P is
    (1,1,1,1); the fourth eigenpair is the exact conjugate of the third.
    """

    eigenvalues: tuple
    P: np.ndarray
    P_inv: np.ndarray
    condition: float

    @property
    def lam(self):
        return self.eigenvalues[1].real

    @property
    def mu(self):
        return self.eigenvalues[2]


def mat_mul(a, b):
    """Product of two 4x4 matrices of the same carrier."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != (4, 4) or b.shape != (4, 4):
        raise ValueError("mat_mul expects 4x4 operands")
    return a @ b


def _det_and_adjugate(a):
    # 2x2-minor expansion; exact sequence of +,-,* so it works on any carrier
    s0 = a[0, 0] * a[1, 1] - a[1, 0] * a[0, 1]
    s1 = a[0, 0] * a[1, 2] - a[1, 0] * a[0, 2]
    s2 = a[0, 0] * a[1, 3] - a[1, 0] * a[0, 3]
    s3 = a[0, 1] * a[1, 2] - a[1, 1] * a[0, 2]
    s4 = a[0, 1] * a[1, 3] - a[1, 1] * a[0, 3]
    s5 = a[0, 2] * a[1, 3] - a[1, 2] * a[0, 3]
    c5 = a[2, 2] * a[3, 3] - a[3, 2] * a[2, 3]
    c4 = a[2, 1] * a[3, 3] - a[3, 1] * a[2, 3]
    c3 = a[2, 1] * a[3, 2] - a[3, 1] * a[2, 2]
    c2 = a[2, 0] * a[3, 3] - a[3, 0] * a[2, 3]
    c1 = a[2, 0] * a[3, 2] - a[3, 0] * a[2, 2]
    c0 = a[2, 0] * a[3, 1] - a[3, 0] * a[2, 1]
    det = s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    adj = np.empty((4, 4), dtype=a.dtype)
    adj[0, 0] = a[1, 1] * c5 - a[1, 2] * c4 + a[1, 3] * c3
    adj[0, 1] = -a[0, 1] * c5 + a[0, 2] * c4 - a[0, 3] * c3
    adj[0, 2] = a[3, 1] * s5 - a[3, 2] * s4 + a[3, 3] * s3
    adj[0, 3] = -a[2, 1] * s5 + a[2, 2] * s4 - a[2, 3] * s3
    adj[1, 0] = -a[1, 0] * c5 + a[1, 2] * c2 - a[1, 3] * c1
    adj[1, 1] = a[0, 0] * c5 - a[0, 2] * c2 + a[0, 3] * c1
    adj[1, 2] = -a[3, 0] * s5 + a[3, 2] * s2 - a[3, 3] * s1
    adj[1, 3] = a[2, 0] * s5 - a[2, 2] * s2 + a[2, 3] * s1
    adj[2, 0] = a[1, 0] * c4 - a[1, 1] * c2 + a[1, 3] * c0
    adj[2, 1] = -a[0, 0] * c4 + a[0, 1] * c2 - a[0, 3] * c0
    adj[2, 2] = a[3, 0] * s4 - a[3, 1] * s2 + a[3, 3] * s0
    adj[2, 3] = -a[2, 0] * s4 + a[2, 1] * s2 - a[2, 3] * s0
    adj[3, 0] = -a[1, 0] * c3 + a[1, 1] * c1 - a[1, 2] * c0
    adj[3, 1] = a[0, 0] * c3 - a[0, 1] * c1 + a[0, 2] * c0
    adj[3, 2] = -a[3, 0] * s3 + a[3, 1] * s1 - a[3, 2] * s0
    adj[3, 3] = a[2, 0] * s3 - a[2, 1] * s1 + a[2, 2] * s0
    return det, adj


def mat_inverse(a, tol: Tolerances = DEFAULT_TOL):
    """Adjugate inverse of a 4x4 matrix.

    Raises SingularMatrix when |det| <= tol.singular * ||a||_1^4 or when the
    residual ||a*inv - I||_max exceeds tol.inverse.
    """
    a = np.asarray(a)
    if a.shape != (4, 4):
        raise ValueError("mat_inverse expects a 4x4 matrix")
    if not all_finite(a):
        raise ValueError("mat_inverse requires finite entries")
    with working_precision(a):
        det, adj = _det_and_adjugate(a)
        scale = norm1(a) ** 4
        if abs(det) <= tol.singular * scale:
            raise SingularMatrix(
                f"determinant {complex(det)!r} below threshold "
                f"{tol.singular * scale!r}"
            )
        inv = adj * (one_like(a) / det)
        residual = max_abs(a @ inv - eye4(one_like(a)))
        if residual > tol.inverse:
            raise SingularMatrix(
                f"inverse residual {residual!r} exceeds {tol.inverse!r}"
            )
        return inv


def _householder(one):
    # exact orthogonal symmetric H with H e1 = (1,1,1,1)/2
    h = one / 2
    return np.array(
        [[h, h, h, h], [h, h, -h, -h], [h, -h, h, -h], [h, -h, -h, h]],
        dtype=object if is_extended(one) else None,
    )


def deflated_cubic(m, expected_rowsum=1.0, tol: Tolerances = DEFAULT_TOL):
    """Deflate the known right-eigenvector (1,1,1,1) and return cubic data.

    Returns (b, C, coeffs) where the input is orthogonally similar to
    [[rowsum, b], [0, C]] and coeffs = (a2, a1, a0) are the monic
    characteristic-cubic coefficients of the 3x3 block C.
    """
    m = np.asarray(m)
    one = one_like(m)
    for i in range(4):
        total = m[i, 0] + m[i, 1] + m[i, 2] + m[i, 3]
        if abs(total - expected_rowsum * one) > tol.rowsum:
            raise RowSumViolation(i, float(total), expected_rowsum)
    H = _householder(one)
    B = H @ m @ H
    b = B[0, 1:]
    C = B[1:, 1:]
    t = C[0, 0] + C[1, 1] + C[2, 2]
    s = (
        C[0, 0] * C[1, 1] - C[0, 1] * C[1, 0]
        + C[0, 0] * C[2, 2] - C[0, 2] * C[2, 0]
        + C[1, 1] * C[2, 2] - C[1, 2] * C[2, 1]
    )
    d = (
        C[0, 0] * (C[1, 1] * C[2, 2] - C[1, 2] * C[2, 1])
        - C[0, 1] * (C[1, 0] * C[2, 2] - C[1, 2] * C[2, 0])
        + C[0, 2] * (C[1, 0] * C[2, 1] - C[1, 1] * C[2, 0])
    )
    return b, C, (-t, s, -d)


def _cubic_real_and_pair(a2, a1, a0):
    """Roots of x^3 + a2 x^2 + a1 x + a0.

    Returns ("pair", lam, re, im) for one real root plus a conjugate pair
    with im > 0, or ("real", r1, r2, r3) for three real roots.
    """
    one = a2 * 0 + 1
    p = a1 - a2 * a2 / 3
    q = 2 * a2**3 / 27 - a2 * a1 / 3 + a0
    disc = q * q / 4 + p**3 / 27
    if disc > 0:
        # one real root; take the non-cancelling Cardano branch
        sq = s_sqrt(disc)
        half_q = -q / 2
        u3 = half_q + sq if half_q >= 0 else half_q - sq
        u = s_cbrt(u3)
        v = -p / (3 * u) if abs(u) > 0 else u * 0
        lam = u + v - a2 / 3
        for _ in range(3):
            f = ((lam + a2) * lam + a1) * lam + a0
            fp = (3 * lam + 2 * a2) * lam + a1
            if abs(fp) == 0:
                break
            lam = lam - f / fp
        t = -a2
        re = (t - lam) / 2
        mod2 = a1 - lam * (t - lam)
        im2 = mod2 - re * re
        if im2 <= 0:
            return ("real", lam, re, re)
        return ("pair", lam, re, s_sqrt(im2))
    # three real roots (or a repeated root) via the trigonometric form
    if p >= 0:
        r = -a2 / 3
        return ("real", r, r + one * 0, r + one * 0)
    m2 = s_sqrt(-p / 3)
    arg = 3 * q / (2 * p * m2)
    arg = max(-one, min(one, arg))
    theta = s_acos(arg)
    pi = s_acos(-one)
    roots = [2 * m2 * s_cos((theta - 2 * pi * k) / 3) - a2 / 3 for k in range(3)]
    return ("real", *roots)


def _classify_roots(kind, r1, r2, r3, tol):
    """Raise SpectrumOutOfClass with a named diagnosis when out of class."""
    if kind == "real":
        roots = sorted((float(r1), float(r2), float(r3)))
        gaps = [abs(roots[0] - roots[1]), abs(roots[1] - roots[2])]
        scale = max(1.0, *(abs(r) for r in roots))
        if min(gaps) <= tol.spectral_class * scale:
            raise SpectrumOutOfClass(
                f"repeated real eigenvalue among {roots}"
            )
        if any(r < 0 for r in roots):
            raise SpectrumOutOfClass(f"negative real eigenvalue among {roots}")
        if any(abs(r) <= tol.spectral_class for r in roots):
            raise SpectrumOutOfClass(f"zero eigenvalue among {roots}")
        raise SpectrumOutOfClass(f"all-real distinct spectrum {roots}")
    lam, re, im = r1, r2, r3
    if lam <= 0:
        raise SpectrumOutOfClass(f"real eigenvalue {float(lam)!r} not positive")
    if lam >= 1 - tol.spectral_class:
        raise SpectrumOutOfClass(
            f"real eigenvalue {float(lam)!r} too close to 1"
        )
    modulus = s_sqrt(re * re + im * im)
    if im <= tol.spectral_class * modulus:
        raise SpectrumOutOfClass(
            "conjugate pair indistinguishable from a repeated real pair"
        )


def _cross(u, v):
    return np.array(
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ],
        dtype=u.dtype,
    )


def _null_vector_3x3(C, nu):
    """Null vector of (C - nu*I) from the largest cross product of two rows."""
    dtype = object if is_extended(nu) else complex
    rows = [
        np.array([C[i, j] - (nu if i == j else nu * 0) for j in range(3)],
                 dtype=dtype)
        for i in range(3)
    ]
    best = None
    best_norm = -1.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        cand = _cross(rows[i], rows[j])
        size = float(sum(abs(x) ** 2 for x in cand))
        if size > best_norm:
            best_norm = size
            best = cand
    if best_norm <= 0:
        raise SpectrumOutOfClass("defective eigenvalue: no null direction")
    return best


def _eigenvector(b, C, H, nu, one):
    complex_one = make_complex(one, one * 0)
    y = _null_vector_3x3(C, nu * complex_one)
    bty = b[0] * y[0] + b[1] * y[1] + b[2] * y[2]
    w0 = bty / (nu * complex_one - complex_one)
    w = np.array([w0, y[0], y[1], y[2]],
                 dtype=object if is_extended(one) else complex)
    full = H @ w
    # deterministic normalisation: first strictly-largest component becomes 1
    idx = 0
    largest = abs(full[0])
    for i in (1, 2, 3):
        size = abs(full[i])
        if size > largest:
            largest = size
            idx = i
    if largest == 0:
        raise SpectrumOutOfClass("zero eigenvector")
    return full * (complex_one / full[idx])


def eigendecompose_markov(m, tol: Tolerances = DEFAULT_TOL) -> Spectrum:
    """Spectrum (1, lam, mu, conj(mu)) of a 4x4 row-stochastic matrix.

    The eigenvalue 1 is deflated analytically through an exact Householder
    similarity; the remaining cubic is solved in closed form, so the result
    is deterministic and carries no iteration state. Raises RowSumViolation
    or SpectrumOutOfClass (with a diagnosis naming the failure).
    """
    m = np.asarray(m)
    if m.shape != (4, 4):
        raise ValueError("eigendecompose_markov expects a 4x4 matrix")
    if not all_finite(m):
        raise ValueError("eigendecompose_markov requires finite entries")
    with working_precision(m):
        one = one_like(m)
        b, C, coeffs = deflated_cubic(m, 1.0, tol)
        kind, r1, r2, r3 = _cubic_real_and_pair(*coeffs)
        _classify_roots(kind, r1, r2, r3, tol)
        lam, re, im = r1, r2, r3
        mu = make_complex(re, im)
        H = _householder(one)
        v_lam = _eigenvector(b, C, H, lam + 0 * one, one)
        v_lam = re_mat(v_lam.reshape(1, 4)).reshape(4)
        v_mu = _eigenvector(b, C, H, mu, one)
        czero = make_complex(one * 0, one * 0)
        cone = make_complex(one, one * 0)
        P = np.empty((4, 4), dtype=object if is_extended(one) else complex)
        for i in range(4):
            P[i, 0] = cone
            P[i, 1] = make_complex(v_lam[i], one * 0)
            P[i, 2] = v_mu[i]
            P[i, 3] = v_mu[i].conjugate()
        P_inv = mat_inverse(P, tol)
        eigs = (cone, make_complex(lam, one * 0), mu, mu.conjugate())
        D = np.full((4, 4), czero, dtype=P.dtype)
        for i in range(4):
            D[i, i] = eigs[i]
        recomposed = P @ D @ P_inv
        residual = max_abs(re_mat(recomposed) - m)
        if residual > tol.recompose * max(1.0, max_abs(m)):
            raise SpectrumOutOfClass(
                f"recomposition residual {residual!r} too large; "
                "matrix too ill-conditioned for this spectral class"
            )
        condition = norm1(P) * norm1(P_inv)
        return Spectrum(eigs, P, P_inv, condition)


def expm(q):
    """Matrix exponential by scaling and squaring a stagnation-summed series.

    The scaling exponent is s = max(0, ceil(log2(||q||_1)) + 4); the Taylor
    series of q/2^s is accumulated until it no longer changes the partial
    sum, then squared s times. Rows of the result sum to 1 (within 1e-10 in
    float64) whenever rows of q sum to 0.
    """
    q = np.asarray(q)
    if q.shape != (4, 4):
        raise ValueError("expm expects a 4x4 matrix")
    if not all_finite(q):
        raise ValueError("expm requires finite entries")
    with working_precision(q):
        one = one_like(q)
        norm = norm1(q)
        s = max(0, math.ceil(math.log2(norm)) + 4) if norm > 0 else 0
        a = q * (one / 2**s)
        term = eye4(one)
        total = eye4(one)
        for n in range(1, 501):
            term = (term @ a) * (one / n)
            new_total = total + term
            if all((new_total[i, j] == total[i, j] for i in range(4) for j in range(4))):
                break
            total = new_total
        for _ in range(s):
            total = total @ total
        return total


def oracle_expm(q, terms: int):
    """Plain truncated Taylor sum in compensated (double-double) arithmetic.

    No scaling is applied; meant as an independent cross-check of expm for
    ||q||_1 <= 50, alongside taylor_tail_bound(q, terms).
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    q = np.asarray(q)
    if q.shape != (4, 4):
        raise ValueError("oracle_expm expects a 4x4 matrix")
    qd = _dd.dd_from(np.asarray(q, dtype=float) if q.dtype == object else q)
    term = _dd.dd_from(np.eye(4))
    total = _dd.dd_from(np.eye(4))
    for n in range(1, terms + 1):
        term = _dd.dd_div_scalar(_dd.dd_matmul(term, qd), n)
        total = _dd.dd_add(total, term)
    return _dd.dd_value(total)


def taylor_tail_bound(q, terms: int) -> float:
    """Bound on the Taylor tail left after `terms` terms of oracle_expm."""
    norm = norm1(np.asarray(q, dtype=float) if np.asarray(q).dtype == object
                 else np.asarray(q))
    if norm == 0:
        return 0.0
    # first omitted term, inflated by the geometric factor of the remainder
    log_first = (terms + 1) * math.log(norm) - math.lgamma(terms + 2)
    ratio = norm / (terms + 2)
    if ratio >= 1:
        return math.inf
    return math.exp(log_first) / (1 - ratio)
