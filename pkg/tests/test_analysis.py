import numpy as np
import pytest

import oracles
from generators import random_accretive, random_hypocontractive_semi, random_semi_contractive, rng
from hypoindex import (
    DomainError, FitError, PreconditionError, default_grid, discrete_power_report, hc_index,
    epsilon_scaling_study, propagator_norm_samples, short_time_exponent_fit, shifted_decay_fit,
)

ENVELOPE = np.array([[1.0, -1.0], [1.0, 0.0]])
CHAIN = np.array([[0, -1, 0, 0], [1, 0, -1, 0], [0, 1, -1, 0], [0, 0, 0, -1]], float)
UNSTABLE = np.array([[9.0, -3.0], [3.0, -1.0]])
TRIANGULAR = np.array([[-1.0, 4.0, -8.0], [0.0, -1.0, 4.0], [0.0, 0.0, -1.0]])
ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
SKEW3 = np.diag([1.0, 1.0], 1) - np.diag([1.0, 1.0], -1)
SHIFT = np.diag([1.0, 1.0], 1)


class TestSamples:
    def test_identity_and_zero(self):
        ts = [0.1, 1.0, 2.0]
        assert [v for _, v in propagator_norm_samples(np.eye(2), ts)] == pytest.approx(np.exp(-np.array(ts)))
        assert [v for _, v in propagator_norm_samples(np.zeros((3, 3)), ts)] == pytest.approx([1, 1, 1])

    def test_envelope_short_time(self):
        (_, v), = propagator_norm_samples(ENVELOPE, [0.01])
        assert 1 - 1e-4 < v < 1

    def test_against_taylor_oracle(self):
        r = rng(50)
        for _ in range(10):
            B = random_accretive(r, r.integers(1, 4))
            for t, v in propagator_norm_samples(B, [0.05, 0.5]):
                assert v == pytest.approx(float(oracles.expm_taylor_mp(B, t)), abs=1e-12)

    def test_accretive_norms_are_monotone(self):
        r = rng(51)
        for _ in range(30):
            B = random_accretive(r)
            norms = [v for _, v in propagator_norm_samples(B, np.linspace(0.01, 3, 30))]
            assert norms[0] <= 1 + 1e-12
            assert np.all(np.diff(norms) <= 1e-12)

    def test_rejects_bad_time(self):
        with pytest.raises(DomainError):
            propagator_norm_samples(np.eye(2), [0.1, -1.0])


class TestShortTimeFit:
    @pytest.mark.parametrize("B, m", [(np.eye(2), 0), (ENVELOPE, 1), (-CHAIN, 2)])
    def test_exponent(self, B, m):
        fit = short_time_exponent_fit(B, m)
        assert abs(fit.a_est - (2 * m + 1)) <= 0.2
        assert fit.a_rounded == fit.a_expected == 2 * m + 1
        assert fit.r_squared >= 0.999
        assert np.all((fit.deficits > 0) & (fit.deficits < 1))

    def test_identity_constant(self):
        assert short_time_exponent_fit(np.eye(2), 0).c_est == pytest.approx(1, rel=0.05)

    def test_random_hypocoercive(self):
        r = rng(52)
        done = 0
        while done < 10:
            B = random_accretive(r, r.integers(2, 4), defective=False)
            m = hc_index(B).m_hc
            if m > 2:
                continue
            try:
                fit = short_time_exponent_fit(B, m)
            except FitError:
                continue
            assert abs(fit.a_est - fit.a_expected) <= 0.2
            done += 1

    def test_rejects_non_accretive(self):
        with pytest.raises(PreconditionError, match="shifted_decay_fit"):
            short_time_exponent_fit(UNSTABLE, 1)

    def test_rejects_negative_index(self):
        with pytest.raises(DomainError):
            short_time_exponent_fit(np.eye(2), -1)

    def test_unresolvable_deficit(self):
        with pytest.raises(FitError, match="window"):
            short_time_exponent_fit(1e-20 * np.eye(2), 0)


class TestShiftedFit:
    def test_unstable_generator(self):
        fit = shifted_decay_fit(UNSTABLE)
        assert fit.lambda_shift == pytest.approx(-1)
        assert abs(fit.a_est - 3) <= 0.2

    def test_triangular(self):
        fit = shifted_decay_fit(TRIANGULAR)
        assert fit.a_expected == 3 and abs(fit.a_est - 3) <= 0.2

    def test_accretive_without_shift(self):
        a = shifted_decay_fit(ENVELOPE)
        b = short_time_exponent_fit(ENVELOPE, 1)
        assert a.lambda_shift == 0
        assert a.a_est == pytest.approx(b.a_est) and a.c_est == pytest.approx(b.c_est)

    def test_no_shifted_index(self):
        with pytest.raises(PreconditionError):
            shifted_decay_fit(np.diag([1.0, 2.0]))


class TestEpsilonStudy:
    @pytest.mark.parametrize("A, C, m", [
        (0.3 * SKEW3, np.eye(3), 0),
        (ROT, np.diag([1.0, 0.0]), 1),
        (SKEW3, np.diag([1.0, 0.0, 0.0]), 2),
    ])
    def test_slope(self, A, C, m):
        study = epsilon_scaling_study(A, C, [0.1, 0.2, 0.4])
        assert study.m_hc == m and study.slope_expected == 2 * m
        assert abs(study.slope_est - 2 * m) <= 0.2
        assert 0 < study.c_scaled_min <= study.c_scaled_max

    def test_index_must_be_constant(self):
        with pytest.raises(PreconditionError, match="eps="):
            epsilon_scaling_study(np.diag([0.0, -1.0]), np.eye(2) + ROT, [0.5, 1.0])

    def test_bad_grid(self):
        with pytest.raises(DomainError):
            epsilon_scaling_study(ROT, np.eye(2), [0.1])
        with pytest.raises(DomainError):
            epsilon_scaling_study(ROT, np.eye(2), [0.1, -0.1])


class TestPowerReport:
    def test_shift(self):
        rep = discrete_power_report(SHIFT)
        assert rep.m_from_profile == rep.m_gram == 2 and not rep.scaled
        assert rep.gap == pytest.approx(1)

    def test_half_identity(self):
        rep = discrete_power_report(0.5 * np.eye(2))
        assert rep.m_from_profile == 0 and rep.gap == pytest.approx(0.5)

    def test_twice_shift(self):
        rep = discrete_power_report(2 * SHIFT)
        assert rep.scaled and rep.m_from_profile == rep.m_gram == 2
        assert [v for _, v in rep.profile[:2]] == pytest.approx([2, 4])

    def test_unitary_has_no_drop(self):
        rep = discrete_power_report(np.eye(3))
        assert rep.m_from_profile is None and rep.m_gram is None

    def test_zero(self):
        with pytest.raises(DomainError):
            discrete_power_report(np.zeros((2, 2)))

    def test_profile_matches_gram(self):
        r = rng(53)
        for _ in range(200):
            A = random_semi_contractive(r)
            if r.random() < 0.5:
                A = A * (1 + 3 * r.random())
            rep = discrete_power_report(A)
            assert rep.m_from_profile == rep.m_gram or rep.indeterminate

    def test_unit_norms_up_to_index(self):
        r = rng(54)
        for _ in range(100):
            A = random_hypocontractive_semi(r)
            rep = discrete_power_report(A)
            m = rep.m_from_profile
            assert all(abs(v - 1) <= 1e-10 for _, v in rep.profile[:m])
            assert rep.profile[m][1] < 1 and rep.gap > 0


def test_default_grid():
    g = default_grid()
    assert len(g) == 25 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(10 ** -1.5)
