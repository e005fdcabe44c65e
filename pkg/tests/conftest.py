import math

import numpy as np
import pytest

# 10-decimal matrix display for the l=-1 family member, as circulated; it is
# the 2<->3 state relabelling of the member that matches the logarithm
# displays (see families.swap_states).
M_PRINT = np.array(
    [
        [0.1428588867, 0.3571393697, 0.3571463443, 0.1428553993],
        [0.1428588866, 0.3571411134, 0.3571446008, 0.1428553992],
        [0.1428553992, 0.3571446008, 0.3571411134, 0.1428588866],
        [0.1428553993, 0.3571463443, 0.3571393697, 0.1428588867],
    ]
)

# principal logarithm and branch -1 logarithm displays for that member
LOG0_PRINT = math.pi / 4 * np.array(
    [[-17, 12, 8, -3], [3, -13, 5, 5], [5, 5, -13, 3], [-3, 8, 12, -17]]
)
LOGM1_PRINT = math.pi / 4 * np.array(
    [[-21, 4, 16, 1], [7, -9, 1, 1], [1, 1, -9, 7], [1, 16, 4, -21]]
)

# boundary-vector worked pair: principal branch L and its branch-1 partner R
L_PRINT = math.pi / 4 * np.array(
    [[-26, 17, 13, -4], [4, -14, 4, 6], [6, 4, -14, 4], [-4, 13, 17, -26]]
)
R_PRINT = math.pi / 4 * np.array(
    [[-30, 25, 5, 0], [0, -10, 0, 10], [10, 0, -10, 0], [0, 5, 25, -30]]
)

U_VECTOR = np.array(
    [-5 * math.pi / 2, -5 * math.pi / 4, 5 * math.pi / 2, 0.5, 1.0, 0.5]
)


def random_rate_matrix(rng, scale=1.0):
    """Random generator with off-diagonal entries uniform in [0, scale]."""
    q = rng.uniform(0.0, scale, size=(4, 4))
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return q


def random_variety_vector(rng, scale=2.0):
    """Random v with v4^2 - v5*v6 = -1/4 exactly solved for v6."""
    v = rng.uniform(-scale, scale, size=6)
    if abs(v[4]) < 0.1:
        v[4] = 0.1 * (1 if v[4] >= 0 else -1)
    v[5] = (v[3] * v[3] + 0.25) / v[4]
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def not_embeddable():
    """In-class Markov matrix with an empty generator set."""
    p = np.array(
        [
            [1, -5, 1 - 1j, 1 + 1j],
            [1, 2, 1j, -1j],
            [1, 2, -1j, 1j],
            [1, -5, -1 + 1j, -1 - 1j],
        ],
        dtype=complex,
    )
    mu = 0.2 * np.exp(1.0j)
    d = np.diag([1.0, 0.2, mu, np.conj(mu)])
    return (p @ d @ np.linalg.inv(p)).real
