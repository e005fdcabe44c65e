"""Strand-symmetric generator parametrization and polyhedral cone checks.

A strand-symmetric (SS) 4x4 matrix has rows (a,b,c,d), (e,f,g,h), (h,g,f,e),
(d,c,b,a). Row-sum-zero SS matrices with a normalized conjugate eigenvalue
pair are parametrized by an angle theta and a vector v in R^6 restricted to
the quadric v4^2 - v5*v6 = -1/4; the angle enters only through theta*v4,
theta*v5, theta*v6, so all logarithm branches of one SS Markov matrix share
v and differ by full turns of the angle.

The rate-matrix region P(theta) = {v : Q(theta, v) has non-negative
off-diagonals} is a convex polyhedral cone. For k != 0 the set
P(theta)^c n P(theta + 2*pi*k) splits into two components, the first cut
out by a seven-inequality system and the second its image under the swap
(v1, -v2, v3, -v4, v6, v5). Samplers here produce vectors in the first
component: generators whose principal-branch logarithm fails to be a rate
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._scalars import pi_like, s_sqrt
from .errors import KZero, NotRescalable, OffVariety
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "SSPattern",
    "GeneratorParams",
    "ConeVerdict",
    "is_ss",
    "build_q",
    "variety_residual",
    "q_spectrum",
    "cone_check",
    "ray_generators",
    "sample_interior",
]

@dataclass(frozen=True)
class SSPattern:
    """The eight free entries (a..h) of a strand-symmetric matrix."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float

    def matrix(self) -> np.ndarray:
        a, b, c, d, e, f, g, h = (
            self.a, self.b, self.c, self.d, self.e, self.f, self.g, self.h,
        )
        return np.array(
            [[a, b, c, d], [e, f, g, h], [h, g, f, e], [d, c, b, a]]
        )

    @classmethod
    def from_matrix(cls, m, tol: Tolerances = DEFAULT_TOL) -> "SSPattern":
        m = np.asarray(m)
        if not is_ss(m, tol):
            raise ValueError("matrix does not have the strand-symmetric layout")
        return cls(*(float(x) for x in m[0]), *(float(x) for x in m[1]))


@dataclass(frozen=True)
class GeneratorParams:
    """Angle and 6-vector parametrizing a row-sum-zero SS matrix.

    Both float and mpmath carriers are accepted; the carrier propagates
    through build_q and the samplers.
    """

    theta: float
    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v)
        if v.dtype != object:
            v = v.astype(float)
        object.__setattr__(self, "v", v)
        if self.v.shape != (6,):
            raise ValueError("v must have six components")


@dataclass(frozen=True)
class ConeVerdict:
    """Membership of v in the rate cone and in the two branch-gap components."""

    in_P_theta: bool
    in_C1: bool
    in_C2: bool
    violated: tuple = ()
    binding: tuple = ()

    def __post_init__(self):
        if self.in_C1 and self.in_C2:
            raise ValueError("C1 and C2 are disjoint; verdict inconsistent")


def is_ss(m, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True when row 3 reverses row 2 and row 4 reverses row 1, within tol."""
    m = np.asarray(m)
    if m.shape != (4, 4):
        return False
    worst = 0.0
    for j in range(4):
        worst = max(worst, abs(float(m[2, j] - m[1, 3 - j])))
        worst = max(worst, abs(float(m[3, j] - m[0, 3 - j])))
    return worst <= tol.pattern


def build_q(p: GeneratorParams) -> np.ndarray:
    """Row-sum-zero SS matrix for the given angle and parameter vector."""
    t = p.theta
    v1, v2, v3, v4, v5, v6 = p.v
    q = np.array(
        [
            [v1 + v2 - v3 - t * v4, -v1 - v2 + t * v5,
             -v1 - v2 - t * v5, v1 + v2 + v3 + t * v4],
            [-v1 + v2 - t * v6, v1 - v2 - v3 + t * v4,
             v1 - v2 + v3 - t * v4, -v1 + v2 + t * v6],
            [-v1 + v2 + t * v6, v1 - v2 + v3 - t * v4,
             v1 - v2 - v3 + t * v4, -v1 + v2 - t * v6],
            [v1 + v2 + v3 + t * v4, -v1 - v2 - t * v5,
             -v1 - v2 + t * v5, v1 + v2 - v3 - t * v4],
        ],
        dtype=p.v.dtype,
    )
    assert is_ss(q), "construction violated the SS layout"
    return q


def variety_residual(v):
    """v4^2 - v5*v6 + 1/4; zero exactly on the quadric."""
    v = np.asarray(v)
    res = v[3] * v[3] - v[4] * v[5] + 0.25
    return res if v.dtype == object else float(res)


def q_spectrum(p: GeneratorParams, tol: Tolerances = DEFAULT_TOL):
    """Closed-form spectrum {0, 4*v1, -2*v3 +/- theta*i} of build_q(p).

    Valid only on the variety; theta here is the full angle, so the caller
    includes any 2*pi*k branch offset in p.theta.
    """
    res = variety_residual(p.v)
    if abs(res) > tol.variety:
        raise OffVariety(f"variety residual {res!r} exceeds {tol.variety!r}")
    v1, v3 = float(p.v[0]), float(p.v[2])
    return [
        complex(0.0),
        complex(4.0 * v1),
        complex(-2.0 * v3, p.theta),
        complex(-2.0 * v3, -p.theta),
    ]


def _component_system(v, theta, shifted):
    """Values of the seven component inequalities (first one strict < 0)."""
    v1, v2, v3, v4, v5, v6 = v
    return [
        v1 + v2 + v3 + theta * v4,        # must be < 0
        v1 + v2 + v3 + shifted * v4,      # >= 0 from here on
        v1 - v2 + v3 - shifted * v4,
        -v1 - v2 + shifted * v5,
        -v1 - v2 - shifted * v5,
        -v1 + v2 + shifted * v6,
        -v1 + v2 - shifted * v6,
    ]


def _check_component(values, tol):
    ok = True
    violated = []
    binding = []
    for n, val in enumerate(values, start=1):
        if n == 1:
            good = val <= -tol.entry
        else:
            good = val >= -tol.entry
        if not good:
            ok = False
            violated.append(n)
        if abs(val) <= tol.entry:
            binding.append(n)
    return ok, violated, binding


def component_swap(v) -> np.ndarray:
    """The involution exchanging the two components of the branch gap."""
    v = np.asarray(v, dtype=float)
    return np.array([v[0], -v[1], v[2], -v[3], v[5], v[4]])


def cone_check(p: GeneratorParams, k: int, tol: Tolerances = DEFAULT_TOL) -> ConeVerdict:
    """Test v against the rate cone at theta and both branch-gap components.

    in_P_theta holds when Q(theta, v) has all off-diagonal entries >= -tol;
    in_C1 when the seven-inequality component system holds for v (first
    inequality strict); in_C2 when it holds for the swapped vector.
    """
    theta = p.theta
    shifted = theta + 2 * pi_like(theta) * k
    q = build_q(p)
    violated = []
    binding = []
    in_p = True
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            val = q[i, j]
            if val < -tol.entry:
                in_p = False
                violated.append(f"P({i},{j})")
            elif abs(val) <= tol.entry:
                binding.append(f"P({i},{j})")
    ok1, bad1, bind1 = _check_component(_component_system(p.v, theta, shifted), tol)
    ok2, bad2, bind2 = _check_component(
        _component_system(component_swap(p.v), theta, shifted), tol
    )
    violated += [f"C1:{n}" for n in bad1] + [f"C2:{n}" for n in bad2]
    binding += [f"C1:{n}" for n in bind1] + [f"C2:{n}" for n in bind2]
    return ConeVerdict(
        in_P_theta=in_p,
        in_C1=ok1,
        in_C2=ok2,
        violated=tuple(violated),
        binding=tuple(binding),
    )


def ray_generators(theta, k: int):
    """The three displayed extreme rays of the closed first component."""
    if k == 0:
        raise KZero("ray generators require k != 0")
    one = theta * 0 + 1
    width = abs(theta + 2 * pi_like(theta) * k)
    sgn = one if k > 0 else -one
    zero = one * 0
    dtype = object if not isinstance(one, float) else float
    w1 = np.array([-width, zero, width, zero, one, one], dtype=dtype)
    w2 = np.array([-width, zero, width, zero, -one, one], dtype=dtype)
    w3 = np.array([-width, -width, width, sgn, 2 * one, zero], dtype=dtype)
    return w1, w2, w3


def sample_interior(
    theta: float,
    k: int,
    weights,
    shift_scale: float,
    tol: Tolerances = DEFAULT_TOL,
) -> GeneratorParams:
    """Positive combination of the three rays, pushed back onto the variety.

    Forms v = sum(weights_i * w_i) + shift_scale * (-pi/4, 0, pi/2, 0, 0, 0),
    then rescales the (v4, v5, v6) block by the unique positive factor that
    restores v4^2 - v5*v6 = -1/4. The result lies in the first branch-gap
    component (its closure for boundary weights); membership is re-checked
    and NotRescalable is raised if the rescale lost it.
    """
    if k == 0:
        raise KZero("sample_interior requires k != 0")
    if not (-math.pi < float(theta) < math.pi) or float(theta) == 0.0:
        raise ValueError("theta must lie in (-pi, pi) excluding 0")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (3,) or not np.all(weights > 0):
        raise ValueError("weights must be three strictly positive reals")
    one = theta * 0 + 1
    pi = pi_like(theta)
    w1, w2, w3 = ray_generators(theta, k)
    v = weights[0] * w1 + weights[1] * w2 + weights[2] * w3
    shift = np.array(
        [-pi / 4, one * 0, pi / 2, one * 0, one * 0, one * 0], dtype=w1.dtype
    )
    v = v + shift_scale * shift
    gap = v[4] * v[5] - v[3] * v[3]
    if gap <= 0:
        raise NotRescalable(
            f"v4^2 - v5*v6 = {float(-gap)!r} >= 0; no positive rescale reaches the variety"
        )
    factor = s_sqrt((one / 4) / gap)
    v[3:] = v[3:] * factor
    params = GeneratorParams(theta, v)
    verdict = cone_check(params, k, tol)
    if not verdict.in_C1:
        raise NotRescalable(
            f"variety rescale left the sampled component: violated {verdict.violated}"
        )
    return params
