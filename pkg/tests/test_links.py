import math

import numpy as np
import pytest

from covert_relay.channel import rng_from_seed
from covert_relay.links import (
    PSI0,
    PSI1,
    LinkGains,
    PowerSplit,
    amplification_factor,
    leakage_max,
    nonselected_relay_sinrs,
    secrecy_rate,
    secrecy_rate_from_sinrs,
    sinr_destination,
    sinr_relay,
)


class TestPowerSplit:
    def test_bounds_enforced(self):
        PowerSplit(0.0, 1.0)
        with pytest.raises(ValueError):
            PowerSplit(-0.1, 0.5)
        with pytest.raises(ValueError):
            PowerSplit(0.5, 1.1)


class TestAmplificationFactor:
    def test_null_hypothesis_value(self):
        # G = sqrt((1-xi) P / ((1-rho) P |h_rd|^2 + sigma2)) by direct arithmetic.
        split = PowerSplit(0.5, 0.5)
        g = amplification_factor(split, P=10.0, h_rd_abs2=0.2, w_h_sr_abs2=0.7,
                                 sigma2=0.01, hypothesis=PSI0)
        assert g == pytest.approx(math.sqrt(5.0 / 1.01), rel=1e-12)
        assert g == pytest.approx(2.2249, abs=1e-4)

    def test_full_jam_fraction_kills_relay_power(self):
        g = amplification_factor(PowerSplit(0.5, 1.0), 10.0, 0.2, 0.7, 0.01)
        assert g == 0.0

    def test_branch_continuity_at_rho_zero(self):
        split = PowerSplit(0.0, 0.3)
        g0 = amplification_factor(split, 10.0, 0.2, 0.7, 0.01, hypothesis=PSI0)
        g1 = amplification_factor(split, 10.0, 0.2, 0.7, 0.01, hypothesis=PSI1)
        assert g0 == pytest.approx(g1, rel=1e-15)


class TestSinrDestination:
    def test_high_snr_arithmetic(self):
        gains = LinkGains(gamma_sr=100.0, gamma_rd=100.0)  # varsigma = 1
        val = sinr_destination(PowerSplit(0.5, 0.5), gains, mode="high_snr")
        assert val == pytest.approx(25.0 / 1.5, rel=1e-12)
        assert val == pytest.approx(16.6667, abs=1e-4)

    def test_zero_information_power(self):
        gains = LinkGains(10.0, 10.0)
        assert sinr_destination(PowerSplit(0.0, 0.5), gains) == 0.0
        assert sinr_destination(PowerSplit(0.5, 0.5), gains, hypothesis=PSI0) == 0.0

    def test_exact_close_to_high_snr_at_high_snr(self):
        gains = LinkGains(1e4, 1e4)
        split = PowerSplit(0.4, 0.6)
        exact = sinr_destination(split, gains, mode="exact")
        approx = sinr_destination(split, gains, mode="high_snr")
        assert abs(exact - approx) / approx < 1e-3

    def test_degenerate_denominator_raises(self):
        gains = LinkGains(0.0, 10.0)  # varsigma = 0
        with pytest.raises(ValueError):
            sinr_destination(PowerSplit(1.0, 1.0), gains, mode="high_snr")


class TestSinrRelay:
    def test_high_snr_arithmetic(self):
        gains = LinkGains(50.0, 50.0)
        assert sinr_relay(PowerSplit(0.5, 0.2), gains, mode="high_snr") == pytest.approx(1.0)

    def test_zero_rho(self):
        gains = LinkGains(50.0, 50.0)
        assert sinr_relay(PowerSplit(0.0, 0.2), gains) == 0.0

    def test_rho_one_high_snr_is_infinite(self):
        gains = LinkGains(50.0, 50.0)
        assert math.isinf(sinr_relay(PowerSplit(1.0, 0.2), gains, mode="high_snr"))

    def test_exact_never_exceeds_high_snr(self):
        rng = rng_from_seed(1)
        for _ in range(200):
            gains = LinkGains(float(rng.uniform(0.1, 1e4)), float(rng.uniform(0.1, 1e4)))
            split = PowerSplit(float(rng.uniform(0.01, 0.99)), float(rng.uniform(0, 1)))
            assert sinr_relay(split, gains, "exact") <= sinr_relay(split, gains, "high_snr")


class TestSecrecyRate:
    def test_arithmetic(self):
        rate = secrecy_rate_from_sinrs(25.0 / 1.5, 1.0, pr_t=0.5)
        expected = 0.25 * (math.log2(1 + 25.0 / 1.5) - 1.0)
        assert rate == pytest.approx(expected, rel=1e-12)
        assert rate == pytest.approx(0.7858, abs=2e-4)

    def test_zero_at_rho_zero(self):
        gains = LinkGains(100.0, 100.0)
        assert secrecy_rate(PowerSplit(0.0, 0.5), gains, pr_t=0.5) == 0.0

    def test_zero_at_equal_sinrs(self):
        assert secrecy_rate_from_sinrs(5.0, 5.0, pr_t=0.5) == 0.0

    def test_full_jam_nonpositive_before_clamp(self):
        gains = LinkGains(100.0, 100.0)
        split = PowerSplit(0.5, 1.0)
        assert secrecy_rate(split, gains, pr_t=0.5, clamp=False) <= 0.0
        assert secrecy_rate(split, gains, pr_t=0.5, clamp=True) == 0.0

    def test_monotone_gamma_d_in_rho_before_peak(self):
        gains = LinkGains(300.0, 100.0)
        rhos = np.linspace(0.01, 0.5, 40)
        vals = [sinr_destination(PowerSplit(r, 0.5), gains, "high_snr") for r in rhos]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_gamma_r_high_snr_increasing_in_rho(self):
        gains = LinkGains(300.0, 100.0)
        rhos = np.linspace(0.0, 0.99, 50)
        vals = [sinr_relay(PowerSplit(r, 0.5), gains, "high_snr") for r in rhos]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestNonselectedRelays:
    def test_full_jam_kills_phase2(self):
        _, g2 = nonselected_relay_sinrs(
            PowerSplit(0.5, 1.0), gamma_sj_bf=1.0, gamma_jd=1.0,
            gamma_si=100.0, gamma_id=100.0, gamma_ij=50.0, gamma_sj=10.0,
        )
        assert g2 == 0.0

    def test_phase1_high_snr_arithmetic(self):
        g1, _ = nonselected_relay_sinrs(
            PowerSplit(0.3, 0.5), gamma_sj_bf=0.5, gamma_jd=1.0,
            gamma_si=100.0, gamma_id=100.0, gamma_ij=50.0, gamma_sj=10.0,
            mode="high_snr",
        )
        assert g1 == pytest.approx(0.3 * 0.5 / 0.7, rel=1e-12)
        assert g1 == pytest.approx(0.2143, abs=1e-4)

    def test_null_hypothesis_zero(self):
        g1, g2 = nonselected_relay_sinrs(
            PowerSplit(0.5, 0.5), 1.0, 1.0, 100.0, 100.0, 50.0, 10.0,
            hypothesis=PSI0,
        )
        assert g1 == g2 == 0.0


def _sample_relay_pair_sinrs(n_draws: int, N_s: int, seed: int):
    """Exact SINR draws for a selected relay i and one bystander j.

    Source (-5,0), destination (5,0), selected relay at the origin and the
    bystander scattered to (0.6, 0.3); the source beamforms at relay i.
    The phase-1 dominance frequency degrades when the bystander sits closer
    to the source than the selected relay, so the layout matters.
    Returns arrays (gamma_i, gamma_j1, gamma_j2).
    """
    rng = rng_from_seed(seed)
    P, sigma2 = 10.0, 1e-5
    src, dst, r_i, r_j = (-5.0, 0.0), (5.0, 0.0), (0.0, 0.0), (0.6, 0.3)
    mu_si, mu_sj = math.dist(src, r_i) ** -4, math.dist(src, r_j) ** -4
    mu_id, mu_jd = math.dist(r_i, dst) ** -4, math.dist(r_j, dst) ** -4
    mu_ij = math.dist(r_i, r_j) ** -4
    split = PowerSplit(0.3, 0.7)

    def cn(mu, shape):
        return np.sqrt(mu / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    h_si = cn(mu_si, (n_draws, N_s))
    h_sj = cn(mu_sj, (n_draws, N_s))
    h_id = cn(mu_id, n_draws)
    h_jd = cn(mu_jd, n_draws)
    h_ij = cn(mu_ij, n_draws)
    w = h_si / np.linalg.norm(h_si, axis=1, keepdims=True)
    g_si = P * np.linalg.norm(h_si, axis=1) ** 2 / sigma2
    g_sj_bf = P * np.abs(np.einsum("ij,ij->i", w.conj(), h_sj)) ** 2 / sigma2
    g_sj = P * np.abs(h_sj[:, 0]) ** 2 / sigma2
    g_id = P * np.abs(h_id) ** 2 / sigma2
    g_jd = P * np.abs(h_jd) ** 2 / sigma2
    g_ij = P * np.abs(h_ij) ** 2 / sigma2

    gamma_i = split.rho * g_si / ((1 - split.rho) * g_id + 1)
    g1 = split.rho * g_sj_bf / ((1 - split.rho) * g_jd + 1)
    g2 = (
        split.rho * g_si * g_ij * (1 - split.xi)
        / ((1 - split.xi) * g_ij * (1 + (1 - split.rho) * g_id)
           + (split.xi * g_sj + 1) * (split.rho * g_si + (1 - split.rho) * g_id + 1))
    )
    return gamma_i, g1, g2


class TestLeakageDominance:
    def test_phase2_always_below_selected(self):
        # Algebraic bound: the bystander's phase-2 SINR is strictly below
        # the selected relay's phase-1 SINR for every draw.
        gamma_i, _, g2 = _sample_relay_pair_sinrs(10_000, 64, seed=77)
        assert np.all(g2 < gamma_i)

    def test_phase1_below_selected_with_high_probability(self):
        gamma_i, g1, _ = _sample_relay_pair_sinrs(10_000, 64, seed=78)
        assert np.mean(g1 < gamma_i) >= 0.99

    def test_leakage_max_equals_selected_with_high_probability(self):
        gamma_i, g1, g2 = _sample_relay_pair_sinrs(10_000, 64, seed=79)
        hits = sum(
            leakage_max([a], gi, [b]) == gi for gi, a, b in zip(gamma_i, g1, g2)
        )
        assert hits / len(gamma_i) >= 0.99

    def test_leakage_max_basics(self):
        assert leakage_max([], 0.7, []) == 0.7
        assert leakage_max([0.1], 0.5, [0.3]) == 0.5
        assert leakage_max([0.9], 0.5, [0.3]) == 0.9

    def test_consistency_with_nonselected_op(self):
        # The vectorized sampler above must agree with the scalar op.
        split = PowerSplit(0.3, 0.7)
        g1, g2 = nonselected_relay_sinrs(
            split, gamma_sj_bf=2.0, gamma_jd=3.0, gamma_si=40.0,
            gamma_id=30.0, gamma_ij=20.0, gamma_sj=5.0, mode="exact",
        )
        expected_g1 = 0.3 * 2.0 / (0.7 * 3.0 + 1)
        denom = 0.3 * 20.0 * (1 + 0.7 * 30.0) + (0.7 * 5.0 + 1) * (
            0.3 * 40.0 + 0.7 * 30.0 + 1
        )
        expected_g2 = 0.3 * 40.0 * 20.0 * 0.3 / denom
        assert g1 == pytest.approx(expected_g1, rel=1e-12)
        assert g2 == pytest.approx(expected_g2, rel=1e-12)
