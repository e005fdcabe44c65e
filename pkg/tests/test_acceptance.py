"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test prints a `ACCEPTANCE Cn ... PASS` line (run pytest with -s to see
them inline). Criterion 1 compares against a published 10-decimal table
that is provably the 2<->3 state relabelling of the matrix all the other
fixtures belong to; the literal comparison is therefore expected to fail
and is marked xfail(strict=True), with the relabelling identity asserted
separately (see the README and families.swap_states).
"""

import math
import random
import time

import numpy as np
import pytest

from embedlog._scalars import to_float_matrix
from embedlog.branches import branch_log, classify, validate_rate
from embedlog.cli import main as cli_main
from embedlog.cli import read_matrix
from embedlog.errors import NegativeOffDiagonal
from embedlog.families import (
    build_example,
    build_perturbed,
    certify_witness,
    closed_form_log,
    perturb_markov,
    recover_delta,
    sample_delta,
    swap_states,
)
from embedlog.linalg import (
    eigendecompose_markov,
    expm,
    oracle_expm,
    taylor_tail_bound,
)
from embedlog.ssm import GeneratorParams, build_q, component_swap, cone_check, q_spectrum
from embedlog.tolerances import DEFAULT_TOL

from conftest import (
    L_PRINT,
    LOG0_PRINT,
    LOGM1_PRINT,
    M_PRINT,
    R_PRINT,
    U_VECTOR,
    random_rate_matrix,
    random_variety_vector,
)


def _report(name, started):
    print(f"ACCEPTANCE {name} PASS ({time.monotonic() - started:.2f} s)")


@pytest.fixture(scope="module")
def flagship():
    fam = build_example(-1)
    spec = eigendecompose_markov(fam.m.m)
    return fam, spec


@pytest.mark.xfail(
    strict=True,
    reason="published 10-decimal table is the 2<->3 relabelling of the "
    "member fixed by the exact logarithm displays (see README)",
)
def test_c1_flagship_reproduction_literal(tmp_path):
    started = time.monotonic()
    code = cli_main(["generate", "example", "--l", "-1", "-o", str(tmp_path)])
    assert code == 0
    matrix = read_matrix(str(tmp_path / "example_l-1.matrix.csv"))
    assert time.monotonic() - started < 1.0
    assert np.abs(matrix - M_PRINT).max() <= 5e-10
    _report("C1", started)


def test_c1_flagship_reproduction_relabelling_diagnosis(tmp_path):
    # the generated member is exact for the logarithm displays; the printed
    # table matches it only after exchanging states 2 and 3
    started = time.monotonic()
    code = cli_main(["generate", "example", "--l", "-1", "-o", str(tmp_path)])
    assert code == 0
    matrix = read_matrix(str(tmp_path / "example_l-1.matrix.csv"))
    assert np.abs(swap_states(matrix) - M_PRINT).max() <= 5e-10
    assert np.abs(expm(LOGM1_PRINT) - matrix).max() <= 5e-10
    assert time.monotonic() - started < 1.0
    _report("C1 (relabelling diagnosis)", started)


def test_c2_logarithm_fixtures(flagship):
    started = time.monotonic()
    _, spec = flagship
    log0 = to_float_matrix(branch_log(spec, 0).log)
    logm1 = to_float_matrix(branch_log(spec, -1).log)
    assert np.abs(log0 - LOG0_PRINT).max() <= 1e-8
    assert np.abs(logm1 - LOGM1_PRINT).max() <= 1e-8
    _report("C2", started)


def test_c3_flagship_classification(flagship):
    started = time.monotonic()
    fam, _ = flagship
    report = classify(fam.m)
    assert report.verdict == "Embeddable"
    assert report.generators == (-1,)
    assert report.principal_is_generator is False
    _report("C3", started)


def test_c4_family_sweep():
    started = time.monotonic()
    for l in range(-3, 4):
        fam = build_example(l)
        report = classify(fam.m)
        assert report.generators == (l,)
        spec = eigendecompose_markov(fam.m.m)
        for k in range(l - 2, l + 3):
            got = to_float_matrix(branch_log(spec, k).log)
            assert np.abs(got - closed_form_log(l, k)).max() <= 1e-7
    elapsed = time.monotonic() - started
    assert elapsed < 5.0
    _report("C4", started)


def test_c5_worked_generator_pair():
    started = time.monotonic()
    L = build_q(GeneratorParams(math.pi / 2, U_VECTOR))
    R = build_q(GeneratorParams(math.pi / 2 + 2 * math.pi, U_VECTOR))
    assert np.abs(L - L_PRINT).max() <= 1e-12
    assert np.abs(R - R_PRINT).max() <= 1e-12
    validate_rate(R)
    assert L[0, 3] < -DEFAULT_TOL.entry and L[3, 0] < -DEFAULT_TOL.entry
    with pytest.raises(NegativeOffDiagonal) as err:
        validate_rate(L)
    assert (err.value.row, err.value.col) == (0, 3)
    assert np.abs(expm(L) - expm(R)).max() <= 1e-9
    _report("C5", started)


def test_c6_spectrum_formula(rng):
    started = time.monotonic()
    for _ in range(50):
        v = random_variety_vector(rng)
        theta = rng.uniform(0.2, 3.0)
        p = GeneratorParams(theta, v)
        got = np.sort_complex(np.array(q_spectrum(p)))
        want = np.sort_complex(np.linalg.eigvals(build_q(p)))
        assert np.abs(got - want).max() <= 1e-8
    _report("C6", started)


def test_c7_open_set_witnesses():
    started = time.monotonic()
    rng = random.Random(20240817)
    direction_rng = np.random.default_rng(20240817)
    for l in (-2, -1, 1, 2):
        witness = None
        for _ in range(50):
            delta = sample_delta(rng, 1e-4)
            witness = certify_witness(l, delta)
            assert witness.report.generators == (l,)
        for _ in range(10):
            direction = direction_rng.uniform(-1, 1, size=(4, 4))
            direction -= direction.mean(axis=1, keepdims=True)
            nudged = perturb_markov(
                witness.m, direction, witness.margins.entry_radius / 100
            )
            assert classify(nudged).generators == (l,)
    elapsed = time.monotonic() - started
    assert elapsed < 30.0
    _report("C7", started)


def test_c8_delta_recovery_roundtrip():
    started = time.monotonic()
    rng = random.Random(2718281828)
    performed = 0
    for l in (-1, 1):
        for _ in range(50):
            while True:
                delta = sample_delta(rng, 1e-3)
                if abs(delta.delta[5] + delta.delta[8]) >= 1e-3:
                    break
            m = build_perturbed(l, delta)
            recovered = recover_delta(l, m)
            assert np.abs(recovered.delta - delta.delta).max() <= 1e-8
            performed += 1
    assert performed == 100
    _report("C8", started)


def test_c9_oracle_equivalence(rng):
    started = time.monotonic()
    for _ in range(200):
        q = random_rate_matrix(rng, rng.uniform(0.5, 5.5))
        assert np.abs(q).sum(axis=0).max() <= 30.0
        fast = expm(q)
        slow = oracle_expm(q, 140)
        assert taylor_tail_bound(q, 140) < 1e-12
        assert np.abs(fast - slow).max() <= 1e-8
        assert np.abs(fast.sum(axis=1) - 1.0).max() <= 1e-10
    _report("C9", started)


def test_c10_cone_properties(rng):
    started = time.monotonic()
    for _ in range(1000):
        v = rng.uniform(-3, 3, size=6)
        theta = rng.uniform(0.1, 3.0)
        k = int(rng.integers(1, 4))
        a = cone_check(GeneratorParams(theta, v), k)
        b = cone_check(GeneratorParams(theta, component_swap(v)), k)
        assert a.in_C1 == b.in_C2 and a.in_C2 == b.in_C1
    for _ in range(50):
        v = rng.uniform(-2, 2, size=6)
        theta = rng.uniform(0.1, 3.0)
        member = cone_check(GeneratorParams(theta, v), 1).in_P_theta
        for _ in range(20):
            lam = rng.uniform(1e-3, 1e3)
            scaled = cone_check(GeneratorParams(theta, lam * v), 1).in_P_theta
            assert scaled == member
    _report("C10", started)
