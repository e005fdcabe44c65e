"""Certified counterexample families: embeddable Markov matrices whose unique
generator sits on a prescribed logarithm branch.

For every integer l there is a closed-form family member M(l) whose only
generator is branch l; for l != 0 its principal logarithm is not a rate
matrix. The member is assembled from an explicit eigenvector matrix and
eigenvalues (1, lam_l, i*rho_l, -i*rho_l); a twelve-parameter deformation
delta perturbs the eigenvectors and eigenvalues while preserving unit row
sums, and delta is recoverable from the perturbed matrix away from the
hyperplane delta6 + delta9 = 0.

The eigenvalue scales fall as low as e^(-51*pi), far below float64
resolution relative to the O(1) matrix entries, so all construction and
recovery here runs on mpmath object arrays at an l-dependent precision.
Results still satisfy the ordinary library contracts and can be cast to
float64 for reporting.

A note on sources: several printed forms of this construction circulate
with sign/relabelling inconsistencies. The anchors used here are the exact
pi/4-integer logarithm displays (closed_form_log); the eigenvector tables
below were re-derived from them and reproduce both displayed logarithm
branches to working precision. The widely quoted 10-decimal l=-1 matrix is
the 2<->3 state relabelling of expm(closed_form_log(-1,-1)); see
swap_states().
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np
from mpmath import mp, mpc, mpf

from ._scalars import (
    is_extended,
    max_abs,
    norm1,
    re_mat,
    to_float_matrix,
    working_precision,
)
from .branches import (
    MarkovMatrix,
    RateMatrix,
    branch_log,
    classify,
    validate_markov,
    validate_rate,
)
from .errors import (
    DeltaOutOfBound,
    LOutOfRange,
    NearDegenerateY,
    NegativeEntry,
    NotAWitness,
    NotInFamily,
    NotMarkov,
    SpectrumOutOfClass,
)
from .linalg import Spectrum, eigendecompose_markov, expm, mat_inverse
from .ssm import is_ss
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "FamilyInstance",
    "PerturbationDelta",
    "WitnessMargins",
    "OpenSetWitness",
    "L_MAX",
    "build_example",
    "closed_form_log",
    "build_perturbed",
    "recover_delta",
    "certify_witness",
    "sample_delta",
    "validated_kappa",
    "swap_states",
    "perturb_markov",
]

L_MAX = 6

_KAPPA_CACHE: dict = {}


@dataclass(frozen=True)
class FamilyInstance:
    """One family member: matrix, closed-form generator, and eigendata."""

    l: int
    m: MarkovMatrix
    expected_generator: RateMatrix
    p_matrix: np.ndarray
    d_matrix: np.ndarray

    def spectrum(self, tol: Tolerances = DEFAULT_TOL) -> Spectrum:
        """Spectrum assembled from the stored exact eigendata."""
        with working_precision(self.p_matrix):
            p_inv = mat_inverse(self.p_matrix, tol)
            eigs = tuple(self.d_matrix[i, i] for i in range(4))
            cond = norm1(self.p_matrix) * norm1(p_inv)
            return Spectrum(eigs, self.p_matrix, p_inv, cond)


@dataclass(frozen=True)
class PerturbationDelta:
    """Deformation coordinates delta_1..delta_12 with their box bound kappa."""

    delta: np.ndarray
    kappa: float = 1e-3

    def __post_init__(self):
        object.__setattr__(
            self, "delta", np.asarray(self.delta, dtype=float).copy()
        )
        if self.delta.shape != (12,):
            raise ValueError("delta must have twelve components")
        if not 0 < self.kappa < 1:
            raise DeltaOutOfBound(f"kappa {self.kappa!r} must lie in (0,1)")
        worst = float(np.max(np.abs(self.delta)))
        if worst >= self.kappa:
            raise DeltaOutOfBound(
                f"|delta| = {worst!r} violates the open bound kappa = {self.kappa!r}"
            )
        self.delta.flags.writeable = False

    @property
    def y_margin(self) -> float:
        """|delta6 + delta9|; zero on the non-injective hyperplane."""
        return abs(float(self.delta[5] + self.delta[8]))


@dataclass(frozen=True)
class WitnessMargins:
    """Certification margins, in log space plus an entrywise radius estimate.

    `generator_min_offdiag` is the smallest off-diagonal entry of the branch-l
    logarithm; `below_violation`/`above_violation` are the magnitudes of the
    most negative off-diagonal entries of branches l-1 and l+1. `entry_radius`
    converts the weakest of the three through a probed local sensitivity into
    an entrywise perturbation radius of the matrix itself.
    """

    generator_min_offdiag: float
    below_violation: float
    above_violation: float
    entry_radius: float


@dataclass(frozen=True)
class OpenSetWitness:
    l: int
    delta: PerturbationDelta
    m: MarkovMatrix
    report: object
    margins: WitnessMargins


def working_dps(l: int) -> int:
    """Decimal precision needed to resolve the family-l spectrum."""
    return 40 + math.ceil(1.3644 * (8 * abs(l) + 3)) + 15


def _check_l(l: int):
    if not isinstance(l, (int, np.integer)):
        raise TypeError("l must be an integer")
    if abs(l) > L_MAX:
        raise LOutOfRange(
            f"|l| = {abs(l)} exceeds {L_MAX}; the smallest eigenvalue would "
            "fall below the supported range"
        )


def _eigen_scales(l: int):
    """(lam, rho): the real eigenvalue and the conjugate-pair modulus."""
    pi = +mp.pi
    if l >= 0:
        return mp.e ** (-(3 + 8 * l) * pi), mp.e ** (-2 * pi * (1 + 2 * l))
    return mp.e ** ((1 + 8 * l) * pi), mp.e ** (4 * l * pi)


def _p_matrix(l: int) -> np.ndarray:
    one = mpf(1)
    i = mpc(0, 1)
    if l >= 0:
        a, b = (6 * l + 2) * one, (-2 * l - 1) * one
        w = np.array([one + i, i, -i, -one - i], dtype=object)
    else:
        a, b = (6 * l + 1) * one, (-2 * l) * one
        w = np.array([one - i, i, -i, -one + i], dtype=object)
    cols = [
        np.array([one, one, one, one], dtype=object),
        np.array([a, b, b, a], dtype=object),
        w,
        np.array([x.conjugate() for x in w], dtype=object),
    ]
    return np.array(cols, dtype=object).T


def _d_matrix(l: int, d10=0, d11=0, d12=0) -> np.ndarray:
    # all three eigenvalue deltas act relative to the family scales, so one
    # kappa box is commensurate with the certification neighbourhood at any l
    lam, rho = _eigen_scales(l)
    zero = mpc(0)
    D = np.full((4, 4), zero, dtype=object)
    D[0, 0] = mpc(1)
    D[1, 1] = mpc((1 + d10) * lam)
    D[2, 2] = mpc(d11 * rho, (1 + d12) * rho)
    D[3, 3] = D[2, 2].conjugate()
    return D


_CLOSED_FORM_POS = (
    lambda l, k: (
        (-9 - 20 * l - 4 * k, 6 + 12 * l + 8 * k, 2 + 12 * l - 8 * k, 1 - 4 * l + 4 * k),
        (1 + 4 * l - 4 * k, -5 - 12 * l + 4 * k, 1 + 4 * l - 4 * k, 3 + 4 * l + 4 * k),
        (3 + 4 * l + 4 * k, 1 + 4 * l - 4 * k, -5 - 12 * l + 4 * k, 1 + 4 * l - 4 * k),
        (1 - 4 * l + 4 * k, 2 + 12 * l - 8 * k, 6 + 12 * l + 8 * k, -9 - 20 * l - 4 * k),
    )
)

_CLOSED_FORM_NEG = (
    lambda l, k: (
        (3 + 20 * l + 4 * k, -12 * l + 8 * k, -4 - 12 * l - 8 * k, 1 + 4 * l - 4 * k),
        (-1 - 4 * l - 4 * k, -1 + 12 * l - 4 * k, 1 - 4 * l + 4 * k, 1 - 4 * l + 4 * k),
        (1 - 4 * l + 4 * k, 1 - 4 * l + 4 * k, -1 + 12 * l - 4 * k, -1 - 4 * l - 4 * k),
        (1 + 4 * l - 4 * k, -4 - 12 * l - 8 * k, -12 * l + 8 * k, 3 + 20 * l + 4 * k),
    )
)


def closed_form_integers(l: int, k: int) -> np.ndarray:
    """Integer part of the closed-form branch-k logarithm (scale pi/4)."""
    table = _CLOSED_FORM_POS if l >= 0 else _CLOSED_FORM_NEG
    return np.array(table(l, k), dtype=int)


def closed_form_log(l: int, k: int) -> np.ndarray:
    """Closed-form branch-k logarithm of the family-l matrix (float64)."""
    return closed_form_integers(l, k) * (math.pi / 4)


def _closed_form_mp(l: int, k: int) -> np.ndarray:
    quarter_pi = mp.pi / 4
    ints = closed_form_integers(l, k)
    return np.array(
        [[int(ints[i, j]) * quarter_pi for j in range(4)] for i in range(4)],
        dtype=object,
    )


def swap_states(m) -> np.ndarray:
    """Relabel states 2 and 3 (simultaneous row and column exchange)."""
    m = np.asarray(m)
    idx = [0, 2, 1, 3]
    return m[np.ix_(idx, idx)]


def build_example(l: int, tol: Tolerances = DEFAULT_TOL) -> FamilyInstance:
    """Family member M(l) with its closed-form generator and eigendata.

    Asserts the Markov property, the strand-symmetric layout, and the
    exponential round trip expm(generator) == M before returning.
    """
    _check_l(l)
    with mp.workdps(working_dps(l)):
        P = _p_matrix(l)
        D = _d_matrix(l)
        P_inv = mat_inverse(P, tol)
        m_raw = re_mat(P @ D @ P_inv)
        try:
            markov = validate_markov(m_raw, tol)
        except NegativeEntry as exc:
            raise LOutOfRange(f"construction for l={l} left the Markov set: {exc}")
        if not is_ss(m_raw, tol):
            raise LOutOfRange(f"construction for l={l} lost the SS layout")
        generator = _closed_form_mp(l, l)
        roundtrip = max_abs(expm(generator) - markov.m)
        if roundtrip > 5e-9:
            raise LOutOfRange(
                f"round trip through expm lost tolerance at l={l}: {roundtrip!r}"
            )
        expected = validate_rate(closed_form_log(l, l), tol)
        return FamilyInstance(int(l), markov, expected, P, D)


def _r_basis() -> np.ndarray:
    # R = [[1,0,0,0],[0,1,0,0],[0,0,1,1],[0,0,i,-i]] splits the conjugate pair
    one = mpf(1)
    i = mpc(0, 1)
    zero = mpf(0)
    return np.array(
        [
            [one, zero, zero, zero],
            [zero, one, zero, zero],
            [zero, zero, one, one],
            [zero, zero, i, -i],
        ],
        dtype=object,
    )


def _s_matrix(l: int) -> np.ndarray:
    """S = P * R^-1, derived at runtime rather than transcribed."""
    P = _p_matrix(l)
    R = _r_basis()
    return re_mat(P @ mat_inverse(R))


def _a_delta(d) -> np.ndarray:
    one = mpf(1)
    zero = mpf(0)
    d = [mpf(float(x)) for x in d]
    return np.array(
        [
            [one, d[0], d[3], d[6]],
            [zero, one, d[4], d[7]],
            [zero, d[1], one, d[8]],
            [zero, d[2], d[5], one],
        ],
        dtype=object,
    )


def build_perturbed(
    l: int, delta: PerturbationDelta, tol: Tolerances = DEFAULT_TOL
) -> MarkovMatrix:
    """Deformed family member with eigenvector and eigenvalue perturbations.

    The eigenvector matrix becomes S * A_delta * R (S derived from the exact
    family eigenvectors); the eigenvalues become (1+delta10)*lam_l and
    rho_l*(delta11 +/- i*(1+delta12)). All three eigenvalue deltas are
    relative to the family scales, so a single kappa box stays inside the
    certification neighbourhood at every l. At delta = 0 this reproduces
    build_example(l) exactly.
    """
    _check_l(l)
    d = delta.delta
    with mp.workdps(working_dps(l)):
        S = _s_matrix(l)
        R = _r_basis()
        P_d = S @ _a_delta(d) @ R
        D = _d_matrix(l, mpf(float(d[9])), mpf(float(d[10])), mpf(float(d[11])))
        P_inv = mat_inverse(P_d, tol)
        m_raw = re_mat(P_d @ D @ P_inv)
        try:
            return validate_markov(m_raw, tol)
        except NegativeEntry as exc:
            raise NotMarkov(
                f"perturbation left the Markov set at l={l} "
                f"(kappa={delta.kappa!r} too large): {exc}"
            )


def validated_kappa(l: int, kappa: float = 1e-3) -> float:
    """Largest kappa <= the requested one whose whole delta-box stays Markov.

    Checks all 2^12 sign-pattern corners of the box (float64 is ample: the
    Markov margins are O(0.1) while corner effects are O(kappa)); halves
    kappa until every corner passes.
    """
    _check_l(l)
    key = (int(l), float(kappa))
    if key in _KAPPA_CACHE:
        return _KAPPA_CACHE[key]
    S = to_float_matrix(_s_matrix(l))
    R = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1j, -1j]])
    lam, rho = (float(x) for x in _eigen_scales(l))
    value = float(kappa)
    while True:
        ok = True
        for pattern in range(4096):
            d = np.array(
                [value if pattern >> b & 1 else -value for b in range(12)]
            )
            A = np.eye(4)
            A[0, 1], A[0, 2], A[0, 3] = d[0], d[3], d[6]
            A[1, 2], A[1, 3] = d[4], d[7]
            A[2, 1], A[2, 3] = d[1], d[8]
            A[3, 1], A[3, 2] = d[2], d[5]
            P_d = S @ A @ R
            D = np.diag(
                [
                    1.0,
                    (1 + d[9]) * lam,
                    complex(d[10] * rho, (1 + d[11]) * rho),
                    complex(d[10] * rho, -(1 + d[11]) * rho),
                ]
            )
            m = (P_d @ D @ np.linalg.inv(P_d)).real
            if m.min() < -1e-12:
                ok = False
                break
        if ok:
            _KAPPA_CACHE[key] = value
            return value
        value /= 2
        if value < 1e-15:
            raise NotMarkov(f"no viable kappa found for l={l}")


def sample_delta(
    rng: random.Random, kappa: float = 1e-3, tol: Tolerances = DEFAULT_TOL
) -> PerturbationDelta:
    """Uniform delta on the open box, resampled off the y-guard hyperplane."""
    while True:
        d = np.array([rng.uniform(-kappa, kappa) for _ in range(12)])
        if abs(d[5] + d[8]) >= tol.y_guard:
            return PerturbationDelta(d, kappa)


def recover_delta(
    l: int, m: MarkovMatrix, tol: Tolerances = DEFAULT_TOL
) -> PerturbationDelta:
    """Invert build_perturbed: read delta off the spectrum of m.

    The three eigenvalue coordinates come straight from the simple spectrum;
    the nine eigenvector coordinates come from solving S*c = v and fixing
    the complex scale through the two components that are 1 and i in the
    unperturbed columns. That scale is determined only when
    delta6 + delta9 != 0 (NearDegenerateY otherwise).
    """
    _check_l(l)
    if not isinstance(m, MarkovMatrix):
        m = validate_markov(m, tol)
    with working_precision(m.m):
        try:
            spec = eigendecompose_markov(m.m, tol)
        except SpectrumOutOfClass as exc:
            raise NotInFamily(f"spectrum out of class: {exc}")
        lam_0, rho_0 = _eigen_scales(l)
        d = [mpf(0)] * 12
        d[9] = spec.eigenvalues[1].real / lam_0 - 1
        d[10] = spec.eigenvalues[2].real / rho_0
        d[11] = spec.eigenvalues[2].imag / rho_0 - 1
        S = _s_matrix(l)
        S_inv = mat_inverse(S, tol)
        c = S_inv @ np.array([x for x in spec.P[:, 1]], dtype=object)
        if abs(c[1]) <= tol.singular:
            raise NotInFamily("real eigenvector inconsistent with the family")
        c = c * (1 / c[1])
        d[0], d[1], d[2] = c[0].real, c[2].real, c[3].real
        y = S_inv @ np.array([x for x in spec.P[:, 2]], dtype=object)
        det = y[2].real * y[3].real + y[2].imag * y[3].imag
        scale = abs(y[2]) * abs(y[3])
        if scale == 0 or abs(det) < tol.y_guard * scale:
            raise NearDegenerateY(
                "delta6 + delta9 is numerically zero; scale is undetermined"
            )
        zc = (y[3].real + y[2].imag) / det
        zd = (y[2].real - y[3].imag) / det
        zeta = mpc(zc, zd)
        w = [zeta * y[j] for j in range(4)]
        d[3], d[6] = w[0].real, w[0].imag
        d[4], d[7] = w[1].real, w[1].imag
        d[8] = w[2].imag
        d[5] = w[3].real
        d_float = np.array([float(x) for x in d])
        worst = float(np.max(np.abs(d_float)))
        if worst >= 1:
            raise NotInFamily(f"recovered |delta| = {worst!r} outside the unit box")
        recovered = PerturbationDelta(d_float, max(1e-3, worst * (1 + 1e-9) + 1e-12))
        residual = max_abs(build_perturbed(l, recovered, tol).m - m.m)
        if residual > 1e-8:
            raise NotInFamily(
                f"rebuild residual {residual!r} exceeds 1e-8; "
                "matrix is not in the perturbed family"
            )
        return recovered


_PROBE_DIRECTIONS = (
    np.array(
        [[1, -1, 0, 0], [-1, 1, 0, 0], [0, 0, 1, -1], [0, 0, -1, 1]], dtype=float
    ),
    np.array(
        [[0, 1, 0, -1], [1, -1, 0, 0], [0, 0, -1, 1], [-1, 0, 1, 0]], dtype=float
    ),
)


def _branch_triple(spec, l, tol):
    return [branch_log(spec, k, tol).log for k in (l - 1, l, l + 1)]


def certify_witness(
    l: int, delta: PerturbationDelta, tol: Tolerances = DEFAULT_TOL
) -> OpenSetWitness:
    """Build the perturbed member and certify it as an open-set witness.

    Succeeds when the classifier returns exactly {l} and the three margin
    quantities clear tol.margin; the entrywise radius is estimated from two
    deterministic row-sum-preserving probes of the local sensitivity of the
    three relevant branches.
    """
    _check_l(l)
    m = build_perturbed(l, delta, tol)
    with working_precision(m.m):
        report = classify(m, tol)
        if report.generators != (l,):
            raise NotAWitness(
                f"generators {list(report.generators)} differ from [{l}]"
            )
        by_k = {b.k: b for b in report.branches}
        margin_gen = _min_offdiag(by_k[l].log)
        below = -_min_offdiag(by_k[l - 1].log)
        above = -_min_offdiag(by_k[l + 1].log)
        if margin_gen <= tol.margin:
            raise NotAWitness(
                f"generator margin {margin_gen!r} at or below {tol.margin!r}"
            )
        if below <= tol.margin:
            raise NotAWitness(f"branch {l-1} violation {below!r} too small")
        if above <= tol.margin:
            raise NotAWitness(f"branch {l+1} violation {above!r} too small")
        spec = report.spectrum
        lam = float(spec.eigenvalues[1].real)
        rho = float(abs(spec.eigenvalues[2]))
        h = mpf(min(1e-12, lam * 1e-3, rho * 1e-3))
        reference = _branch_triple(spec, l, tol)
        sensitivity = 0.0
        for direction in _PROBE_DIRECTIONS:
            probe = m.m + direction * h
            probe_spec = eigendecompose_markov(probe, tol)
            probed = _branch_triple(probe_spec, l, tol)
            shift = max(
                max_abs(a - b) for a, b in zip(probed, reference)
            )
            sensitivity = max(sensitivity, shift / float(h))
        weakest = min(margin_gen, below, above)
        radius = weakest / max(sensitivity, 1e-12)
        radius = min(radius, float(min(x for x in to_float_matrix(m.m).flat)))
        margins = WitnessMargins(margin_gen, below, above, radius)
        return OpenSetWitness(int(l), delta, m, report, margins)


def _min_offdiag(log) -> float:
    return min(
        float(log[i, j]) for i in range(4) for j in range(4) if i != j
    )


def perturb_markov(
    m: MarkovMatrix, direction, size: float, tol: Tolerances = DEFAULT_TOL
) -> MarkovMatrix:
    """Add a row-sum-preserving entrywise perturbation of the given size.

    `direction` must have rows summing to 0; it is rescaled to unit max-norm.
    The addition happens at the carrier's working precision, which matters:
    witness radii sit far below float64 resolution for larger |l|.
    """
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (4, 4):
        raise ValueError("direction must be 4x4")
    if np.abs(direction.sum(axis=1)).max() > 1e-12 * max(1.0, np.abs(direction).max()):
        raise ValueError("direction must preserve row sums")
    peak = np.abs(direction).max()
    if peak == 0:
        return m
    direction = direction / peak
    with working_precision(m.m):
        scale = mpf(size) if is_extended(m.m) else float(size)
        return validate_markov(m.m + direction * scale, tol)
