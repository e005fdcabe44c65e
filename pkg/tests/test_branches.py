import math

import numpy as np
import pytest
from mpmath import mpc

from embedlog._scalars import to_float_matrix
from embedlog.branches import (
    affine_branch_family,
    branch_log,
    classify,
    validate_markov,
    validate_rate,
)
from embedlog.errors import (
    ImaginaryResidue,
    NegativeEntry,
    NegativeOffDiagonal,
    RowSumViolation,
    SpectrumOutOfClass,
)
from embedlog.families import build_example
from embedlog.linalg import Spectrum, eigendecompose_markov, expm

from conftest import LOG0_PRINT, LOGM1_PRINT, M_PRINT, random_rate_matrix


@pytest.fixture(scope="module")
def flagship():
    fam = build_example(-1)
    spec = eigendecompose_markov(fam.m.m)
    return fam, spec


class TestValidateMarkov:
    def test_identity(self):
        validate_markov(np.eye(4))

    def test_flagship_member(self, flagship):
        fam, _ = flagship
        validate_markov(to_float_matrix(fam.m.m))

    def test_negative_entry(self):
        m = np.eye(4)
        m[0, 1] = -0.1
        m[0, 0] = 1.1
        with pytest.raises(NegativeEntry) as err:
            validate_markov(m)
        assert (err.value.row, err.value.col) == (0, 1)

    def test_clamps_tiny_negatives(self):
        m = np.eye(4).astype(float)
        m[0, 1] = -1e-14
        m[0, 0] = 1.0 + 1e-14
        wrapped = validate_markov(m)
        assert wrapped.m[0, 1] == 0.0

    def test_row_sum(self):
        m = np.full((4, 4), 0.3)
        with pytest.raises(RowSumViolation):
            validate_markov(m)


class TestValidateRate:
    def test_zero(self):
        validate_rate(np.zeros((4, 4)))

    def test_branch_fixture_is_rate(self):
        validate_rate(LOGM1_PRINT)

    def test_principal_fixture_rejected(self):
        with pytest.raises(NegativeOffDiagonal) as err:
            validate_rate(LOG0_PRINT)
        assert (err.value.row, err.value.col) == (0, 3)
        assert err.value.value == pytest.approx(-3 * math.pi / 4)

    def test_row_sum(self):
        q = np.zeros((4, 4))
        q[2, 2] = 0.5
        with pytest.raises(RowSumViolation):
            validate_rate(q)


class TestBranchLog:
    def test_principal_display(self, flagship):
        _, spec = flagship
        got = to_float_matrix(branch_log(spec, 0).log)
        assert np.abs(got - LOG0_PRINT).max() < 1e-8

    def test_branch_minus_one_display(self, flagship):
        _, spec = flagship
        bl = branch_log(spec, -1)
        assert np.abs(to_float_matrix(bl.log) - LOGM1_PRINT).max() < 1e-8
        assert bl.is_rate
        assert bl.min_offdiag == 0.0

    def test_row_sums_zero(self, flagship):
        _, spec = flagship
        for k in (-2, 0, 3):
            log = to_float_matrix(branch_log(spec, k).log)
            assert np.abs(log.sum(axis=1)).max() < 1e-9

    def test_principal_roundtrip_random(self, rng):
        done = 0
        while done < 25:
            q = random_rate_matrix(rng, 0.4)
            m = expm(q)
            try:
                spec = eigendecompose_markov(m)
            except SpectrumOutOfClass:
                continue
            done += 1
            back = expm(branch_log(spec, 0).log)
            assert np.abs(back - m).max() <= 5e-9

    def test_imaginary_residue_on_corrupted_spectrum(self, flagship):
        _, spec = flagship
        P = spec.P.copy()
        P[1, 2] = P[1, 2] + mpc(0.25, 0.25)  # break the conjugate pairing
        bad = Spectrum(spec.eigenvalues, P, spec.P_inv, spec.condition)
        with pytest.raises(ImaginaryResidue):
            branch_log(bad, 0)


class TestAffineBranchFamily:
    def test_reproduces_branch_minus_one(self, flagship):
        _, spec = flagship
        base, step = affine_branch_family(spec)
        got = to_float_matrix(base - step)
        assert np.abs(got - LOGM1_PRINT).max() < 1e-8

    def test_step_rows_sum_zero(self, flagship):
        _, spec = flagship
        _, step = affine_branch_family(spec)
        assert np.abs(to_float_matrix(step).sum(axis=1)).max() < 1e-9

    def test_affine_law_dense_window(self, rng):
        done = 0
        while done < 15:
            q = random_rate_matrix(rng, 0.4)
            try:
                spec = eigendecompose_markov(expm(q))
            except SpectrumOutOfClass:
                continue
            done += 1
            base, step = affine_branch_family(spec)
            for k in range(-5, 6):
                direct = to_float_matrix(branch_log(spec, k).log)
                affine = to_float_matrix(base + k * step)
                assert np.abs(direct - affine).max() < 1e-7

    def test_affine_law_far_branch_many_matrices(self, rng):
        done = 0
        while done < 100:
            q = random_rate_matrix(rng, 0.4)
            try:
                spec = eigendecompose_markov(expm(q))
            except SpectrumOutOfClass:
                continue
            done += 1
            base, step = affine_branch_family(spec)
            direct = to_float_matrix(branch_log(spec, 5).log)
            assert np.abs(direct - to_float_matrix(base + 5 * step)).max() < 1e-7


class TestClassify:
    def test_flagship(self, flagship):
        fam, _ = flagship
        report = classify(fam.m)
        assert report.verdict == "Embeddable"
        assert report.generators == (-1,)
        assert not report.principal_is_generator

    def test_printed_snapshot_still_classifies(self):
        # float64 10-decimal snapshot keeps enough structure at l = -1
        report = classify(validate_markov(M_PRINT))
        assert report.generators == (-1,)

    def test_family_l2(self):
        report = classify(build_example(2).m)
        assert report.generators == (2,)

    def test_identity_out_of_class(self):
        with pytest.raises(SpectrumOutOfClass):
            classify(validate_markov(np.eye(4)))

    def test_small_norm_generators_principal(self, rng):
        done = 0
        while done < 100:
            q = random_rate_matrix(rng, 0.5 / 4)
            m = expm(q)
            try:
                report = classify(validate_markov(m))
            except SpectrumOutOfClass:
                continue
            done += 1
            assert report.verdict == "Embeddable"
            assert report.principal_is_generator

    def test_generator_set_contiguous_and_sound(self, rng):
        done = 0
        while done < 30:
            q = random_rate_matrix(rng, 0.6)
            m = expm(q)
            try:
                report = classify(validate_markov(m))
            except SpectrumOutOfClass:
                continue
            done += 1
            gens = report.generators
            if gens:
                assert list(gens) == list(range(gens[0], gens[-1] + 1))
            for b in report.branches:
                if b.k in gens:
                    validate_rate(to_float_matrix(b.log))
                    assert np.abs(expm(b.log) - m).max() <= 5e-9
                assert b.is_rate == (b.k in gens)

    def test_window_covers_generators_plus_one(self, flagship):
        fam, _ = flagship
        report = classify(fam.m)
        ks = sorted(b.k for b in report.branches)
        assert ks == [-2, -1, 0]

    def test_not_embeddable_matrix(self, not_embeddable):
        report = classify(validate_markov(not_embeddable))
        assert report.verdict == "NotEmbeddable"
        assert report.generators == ()
        assert not report.principal_is_generator
        assert len(report.branches) == 3
        assert not any(b.is_rate for b in report.branches)

    def test_interval_matches_brute_force_scan(self, rng, not_embeddable):
        # independent oracle: scan a wide branch window and keep the rate
        # matrices; must agree with the exact constraint intersection
        candidates = []
        while len(candidates) < 30:
            q = random_rate_matrix(rng, rng.uniform(0.1, 0.8))
            try:
                classify_input = validate_markov(expm(q))
                eigendecompose_markov(classify_input.m)
            except SpectrumOutOfClass:
                continue
            candidates.append(classify_input)
        candidates.append(validate_markov(not_embeddable))
        candidates.append(build_example(-1).m)
        for m in candidates:
            report = classify(m)
            spec = report.spectrum
            scanned = tuple(
                k for k in range(-10, 11) if branch_log(spec, k).is_rate
            )
            assert scanned == report.generators
