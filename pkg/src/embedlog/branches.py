"""Markov/rate validation, real logarithm branches, and the embeddability
classifier.

A 4x4 Markov matrix with spectrum {1, lam, mu, conj(mu)}, lam in (0,1) and
Im(mu) > 0, has exactly one real logarithm with zero row sums per branch
index k: shift the complex-pair logarithm by 2*pi*k and reassemble. The
classifier exploits that every entry of that branch family is affine in k,
so intersecting the twelve off-diagonal sign constraints in exact rational
arithmetic yields the complete (finite, contiguous) set of branch indices
whose logarithm is a rate matrix -- a certificate, not a scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._scalars import (
    all_finite,
    exact_fraction,
    im_mat,
    make_complex,
    max_abs,
    one_like,
    pi_like,
    re_mat,
    s_arg,
    s_log,
    working_precision,
)
from .errors import (
    DegenerateStep,
    EmbedLogError,
    ImaginaryResidue,
    NegativeEntry,
    NegativeOffDiagonal,
    RowSumViolation,
    SpectrumOutOfClass,
)
from .linalg import Spectrum, eigendecompose_markov
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "MarkovMatrix",
    "RateMatrix",
    "BranchLog",
    "EmbeddabilityReport",
    "validate_markov",
    "validate_rate",
    "branch_log",
    "affine_branch_family",
    "classify",
]


@dataclass(frozen=True)
class MarkovMatrix:
    """Validated row-stochastic matrix (entries >= 0, rows sum to 1)."""

    m: np.ndarray


@dataclass(frozen=True)
class RateMatrix:
    """Validated generator (off-diagonal >= 0, rows sum to 0)."""

    q: np.ndarray


@dataclass(frozen=True)
class BranchLog:
    """One real logarithm branch, tagged with its index and rate verdict."""

    k: int
    log: np.ndarray
    is_rate: bool
    min_offdiag: float


@dataclass(frozen=True)
class EmbeddabilityReport:
    spectrum: Spectrum
    branches: tuple
    generators: tuple
    verdict: str
    principal_is_generator: bool


def _check_rowsums(m, expected, tol):
    for i in range(4):
        total = m[i, 0] + m[i, 1] + m[i, 2] + m[i, 3]
        if abs(total - expected) > tol.rowsum:
            raise RowSumViolation(i, float(total), expected)


def validate_markov(m, tol: Tolerances = DEFAULT_TOL) -> MarkovMatrix:
    """Wrap a matrix as Markov; entries in [-tol.entry, 0) are clamped to 0."""
    m = np.asarray(m)
    if m.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    if not all_finite(m):
        raise ValueError("matrix entries must be finite")
    out = m.copy()
    for i in range(4):
        for j in range(4):
            x = out[i, j]
            if x < 0:
                if x < -tol.entry:
                    raise NegativeEntry(i, j, float(x))
                out[i, j] = x * 0
    _check_rowsums(out, 1.0, tol)
    out.flags.writeable = False
    return MarkovMatrix(out)


def validate_rate(q, tol: Tolerances = DEFAULT_TOL) -> RateMatrix:
    """Wrap a matrix as a rate matrix (generator)."""
    q = np.asarray(q)
    if q.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    if not all_finite(q):
        raise ValueError("matrix entries must be finite")
    for i in range(4):
        for j in range(4):
            if i != j and q[i, j] < -tol.entry:
                raise NegativeOffDiagonal(i, j, float(q[i, j]))
    _check_rowsums(q, 0.0, tol)
    out = q.copy()
    out.flags.writeable = False
    return RateMatrix(out)


def _offdiag_min(log):
    worst = None
    for i in range(4):
        for j in range(4):
            if i != j and (worst is None or log[i, j] < worst):
                worst = log[i, j]
    return worst


def branch_log(spec: Spectrum, k: int, tol: Tolerances = DEFAULT_TOL) -> BranchLog:
    """Real logarithm branch k of the matrix behind `spec`.

    Assembles P * diag(0, log(lam), log_k(mu), conj(log_k(mu))) * P^-1 and
    discards the imaginary residue after checking it is below tol.real.
    """
    with working_precision(spec.P, spec.P_inv):
        one = one_like(spec.P[0, 0].real)
        lam = spec.eigenvalues[1].real
        mu = spec.eigenvalues[2]
        if not lam > 0:
            raise SpectrumOutOfClass(
                f"cannot take log of non-positive eigenvalue {float(lam)!r}"
            )
        if not mu.imag > 0:
            raise SpectrumOutOfClass("complex eigenvalue must have Im > 0")
        pi = pi_like(one)
        log_mu = make_complex(s_log(abs(mu)), s_arg(mu) + 2 * pi * k)
        czero = make_complex(one * 0, one * 0)
        D = np.full((4, 4), czero, dtype=spec.P.dtype)
        D[1, 1] = make_complex(s_log(lam), one * 0)
        D[2, 2] = log_mu
        D[3, 3] = log_mu.conjugate()
        assembled = spec.P @ D @ spec.P_inv
        residue = max_abs(im_mat(assembled))
        if residue > tol.real:
            raise ImaginaryResidue(
                f"imaginary residue {residue!r} exceeds {tol.real!r}; "
                "spectrum is inconsistent"
            )
        log = re_mat(assembled)
        worst = _offdiag_min(log)
        is_rate = bool(worst >= -tol.entry)
        min_offdiag = float(min(worst, worst * 0))
        return BranchLog(k, log, is_rate, min_offdiag)


def affine_branch_family(spec: Spectrum, tol: Tolerances = DEFAULT_TOL):
    """(base, step) such that branch k equals base + k*step for every k.

    The entries of the branch family are affine in k; the pair is verified
    internally against the directly assembled branch at k = -1.
    """
    base = branch_log(spec, 0, tol).log
    step = branch_log(spec, 1, tol).log - base
    check = branch_log(spec, -1, tol).log
    if max_abs((base - step) - check) > 1e-8:
        raise EmbedLogError("affine branch contract violated beyond 1e-8")
    return base, step


def _integer_interval(base, step, tol_entry):
    """Exact feasible integers for base_ij + k*step_ij >= -tol on off-diagonals.

    Returns (lo, hi, feasible) where lo/hi are Fractions bounding the real
    feasible interval (None means unbounded on that side).
    """
    slack = Fraction(tol_entry)
    lo = None
    hi = None
    feasible = True
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            b = exact_fraction(base[i, j])
            s = exact_fraction(step[i, j])
            if s == 0:
                if b < -slack:
                    feasible = False
                continue
            bound = (-slack - b) / s
            if s > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
    return lo, hi, feasible


def classify(m, tol: Tolerances = DEFAULT_TOL) -> EmbeddabilityReport:
    """Decide embeddability and find every branch index that is a generator.

    Accepts a MarkovMatrix (or raw array, validated first). The twelve
    off-diagonal constraints base_ij + k*step_ij >= -tol.entry are affine in
    k and are intersected in exact rational arithmetic, so the returned
    generator set is complete: no branch outside it can be a rate matrix.
    """
    if not isinstance(m, MarkovMatrix):
        m = validate_markov(m, tol)
    spec = eigendecompose_markov(m.m, tol)
    base, step = affine_branch_family(spec, tol)
    if max_abs(step) < tol.entry:
        raise DegenerateStep(
            "branch step is numerically zero; spectrum must be corrupted"
        )
    lo, hi, feasible = _integer_interval(base, step, tol.entry)
    if lo is None or hi is None:
        raise DegenerateStep(
            "branch constraints unbounded in k; spectrum must be corrupted"
        )
    generators = ()
    if feasible:
        k_min = math.ceil(lo)
        k_max = math.floor(hi)
        if k_min <= k_max:
            generators = tuple(range(k_min, k_max + 1))
    if generators:
        window = range(generators[0] - 1, generators[-1] + 2)
    else:
        centre = math.floor((lo + hi) / 2)
        window = range(centre - 1, centre + 2)
    branches = tuple(branch_log(spec, k, tol) for k in window)
    verdict = "Embeddable" if generators else "NotEmbeddable"
    return EmbeddabilityReport(
        spectrum=spec,
        branches=branches,
        generators=generators,
        verdict=verdict,
        principal_is_generator=0 in generators,
    )
