import numpy as np
import pytest
from hypothesis import given

import oracles
from generators import random_hypocontractive_semi, random_semi_contractive, random_unitary, rng
from hypoindex import (
    ConsistencyError, DomainError, PreconditionError, classify_discrete, defect_matrix, dhc_index,
    power_norm_index, power_norm_profile, scaled_dhc_index, unit_modulus_test,
)
from hypoindex.contractivity import DHC_METHODS
from strategies import complex_matrices, semi_contractive_matrices

SHIFT = np.diag([1.0, 1.0], 1)
CHAIN_IMAGE = np.array([[1, -4, 2, 0], [4, -1, -2, 0], [2, 2, -1, 0], [0, 0, 0, 0]]) / 5


class TestClassification:
    def test_scaled_triangular_is_stable_not_semi_contractive(self):
        c = classify_discrete(0.5 * np.array([[1.0, -2.0], [0.0, -1.0]]))
        assert c.asymptotically_stable and not c.semi_contractive
        assert c.sigma_max == pytest.approx((1 + np.sqrt(2)) / 2)

    def test_identity(self):
        c = classify_discrete(np.eye(3))
        assert c.stable and c.semi_contractive and not c.hypocontractive
        assert c.defect_index == 0

    def test_zero(self):
        c = classify_discrete(np.zeros((2, 2)))
        assert c.contractive and c.hypocontractive and c.defect_index == 2

    def test_jordan_block_on_circle_unstable(self):
        assert not classify_discrete(np.array([[1.0, 1.0], [0.0, 1.0]])).stable

    @given(complex_matrices(max_n=5))
    def test_implications(self, A):
        c = classify_discrete(A)
        assert not c.contractive or c.semi_contractive
        assert not c.semi_contractive or c.stable
        assert not c.asymptotically_stable or c.stable
        assert c.rho <= c.sigma_max * (1 + 1e-10) + 1e-12


class TestDhcIndex:
    @pytest.mark.parametrize("A, m", [(SHIFT, 2), (0.5 * np.eye(3), 0), (CHAIN_IMAGE, 2)])
    def test_worked_values_match_exact_oracle(self, A, m):
        assert oracles.exact_dhc_index(A) == m
        res = dhc_index(A)
        assert res.exists and res.m_dhc == m
        assert set(res.per_method) == set(DHC_METHODS)
        assert set(res.per_method.values()) == {m}

    def test_identity_has_no_index(self):
        res = dhc_index(np.eye(3))
        assert not res.exists and set(res.per_method.values()) == {None}
        w = res.witness_vector
        assert np.linalg.norm(w - np.eye(3) @ w) < 1e-12 and abs(np.linalg.norm(w) - 1) < 1e-12

    def test_rejects_expansive(self):
        with pytest.raises(PreconditionError, match="scaled_dhc_index"):
            dhc_index(2 * SHIFT)

    def test_contractive_iff_zero(self):
        r = rng(30)
        for _ in range(200):
            A = random_semi_contractive(r)
            c = classify_discrete(A)
            m = dhc_index(A).m_dhc
            assert c.contractive == (m == 0)

    def test_power_after_index_is_contractive(self):
        r = rng(31)
        for _ in range(100):
            A = random_hypocontractive_semi(r)
            m = dhc_index(A).m_dhc
            assert np.linalg.norm(np.linalg.matrix_power(A, m + 1), 2) < 1
            if m > 0:
                assert np.linalg.norm(np.linalg.matrix_power(A, m), 2) == pytest.approx(1, abs=1e-10)

    def test_defect_bound(self):
        r = rng(32)
        for _ in range(200):
            A = random_hypocontractive_semi(r)
            n = A.shape[0]
            d = classify_discrete(A).defect_index
            assert dhc_index(A).m_dhc >= (n - d) / d

    def test_telescoping_identity(self):
        r = rng(33)
        for _ in range(100):
            A = random_semi_contractive(r)
            n = A.shape[0]
            D = defect_matrix(A)
            acc = np.zeros((n, n), complex)
            P = np.eye(n)
            for _ in range(n):
                acc = acc + P.conj().T @ D @ P
                P = P @ A
                assert np.linalg.norm(np.eye(n) - P.conj().T @ P - acc, 2) <= 1e-12

    @given(semi_contractive_matrices())
    def test_unitary_similarity(self, A):
        U = random_unitary(rng(34), A.shape[0])
        assert dhc_index(U @ A @ U.conj().T).m_dhc == dhc_index(A).m_dhc

    def test_witness_properties(self):
        r = rng(35)
        for _ in range(100):
            n = r.integers(2, 7)
            A = random_semi_contractive(r, n, force_one=True)
            res = dhc_index(A)
            if res.exists:
                continue
            w = res.witness_vector
            lam = np.vdot(w, A @ w)
            assert np.linalg.norm(A @ w - lam * w) <= 1e-8
            assert abs(abs(lam) - 1) <= 1e-8
            assert np.linalg.norm(defect_matrix(A) @ w) <= 1e-8


class TestPowerNorms:
    def test_shift_profile(self):
        assert [v for _, v in power_norm_profile(SHIFT, 3)] == pytest.approx([1, 1, 0])

    def test_half_identity(self):
        assert [v for _, v in power_norm_profile(0.5 * np.eye(2), 3)] == pytest.approx([0.5, 0.25, 0.125])

    def test_twice_shift(self):
        assert [v for _, v in power_norm_profile(2 * SHIFT, 3)] == pytest.approx([2, 4, 0])

    def test_bad_length(self):
        with pytest.raises(DomainError):
            power_norm_profile(SHIFT, 0)

    def test_index_law_against_extended_precision(self):
        r = rng(36)
        for _ in range(40):
            A = random_hypocontractive_semi(r, r.integers(1, 5))
            m, gap, _ = power_norm_index(A)
            norms = oracles.power_norms_mp(A, m + 1)
            assert all(abs(v - 1) <= 1e-10 for v in norms[:m])
            assert norms[m] < 1 and gap == pytest.approx(1 - norms[m], abs=1e-12)

    def test_identity_never_drops(self):
        m, gap, audit = power_norm_index(np.eye(3))
        assert m is None and gap is None and len(audit) == 3


class TestScaled:
    def test_twice_shift(self):
        res = scaled_dhc_index(2 * SHIFT)
        assert res.sigma_max == pytest.approx(2) and res.m_dshc == 2 and res.criterion_exists

    def test_unitary(self):
        res = scaled_dhc_index(random_unitary(rng(37), 4))
        assert not res.exists and not res.criterion_exists

    def test_diagonal(self):
        res = scaled_dhc_index(np.diag([2.0, 1.0]))
        assert res.sigma_max == pytest.approx(2) and not res.exists

    def test_zero(self):
        with pytest.raises(DomainError):
            scaled_dhc_index(np.zeros((2, 2)))

    def test_scale_invariance(self):
        r = rng(38)
        for _ in range(100):
            A = random_semi_contractive(r)
            t = 10 ** r.uniform(-2, 2)
            try:
                a = scaled_dhc_index(A)
            except DomainError:
                continue
            assert scaled_dhc_index(t * A).m_dshc == a.m_dshc


class TestUnitModulus:
    def test_examples(self):
        res = unit_modulus_test(np.eye(2))
        assert res.has_unit_modulus_eigenvalue and abs(np.linalg.norm(res.witness) - 1) < 1e-12
        assert not unit_modulus_test(0.5 * np.eye(2)).has_unit_modulus_eigenvalue
        assert not unit_modulus_test(CHAIN_IMAGE).has_unit_modulus_eigenvalue

    def test_agrees_with_index_existence(self):
        r = rng(39)
        for _ in range(200):
            A = random_semi_contractive(r)
            try:
                res = unit_modulus_test(A)
            except ConsistencyError:
                pytest.fail("unit modulus tests disagree")
            assert res.has_unit_modulus_eigenvalue == (not dhc_index(A).exists)
