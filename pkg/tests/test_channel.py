import math

import numpy as np
import pytest

from covert_relay.channel import (
    LinkVariances,
    SystemParams,
    Topology,
    dbw_to_watts,
    link_variances,
    lsma_leakage_variance,
    lsma_sinr_si,
    mrt_weights,
    rng_from_seed,
    sample_channels,
    sample_lsma_leakage,
)


def default_setup(**param_overrides):
    params = SystemParams(**param_overrides)
    topo = Topology()
    return params, topo, link_variances(topo, params.alpha)


class TestSystemParams:
    def test_defaults_valid(self):
        SystemParams()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"P": 0.0},
            {"sigma2": -1.0},
            {"epsilon": 0.0},
            {"epsilon": 1.0},
            {"pr_t": 1.5},
            {"N_s": 0},
            {"alpha": 0.0},
            {"n_symbols": 0},
        ],
    )
    def test_invariants_rejected(self, kwargs):
        with pytest.raises(ValueError):
            SystemParams(**kwargs)

    def test_dbw_conversion(self):
        assert dbw_to_watts(-50.0) == pytest.approx(1e-5, rel=1e-12)
        assert dbw_to_watts(10.0) == pytest.approx(10.0, rel=1e-12)
        assert dbw_to_watts(0.0) == 1.0


class TestLinkVariances:
    def test_unit_distance(self):
        topo = Topology(source=(0.0, 0.0), destination=(1.0, 0.0),
                        relays=((0.5, 0.5),), willies=((0.0, 1.0),))
        var = link_variances(topo, alpha=4.0)
        assert var.sd == pytest.approx(1.0)

    def test_power_law_from_geometry(self):
        # Independent oracle: Euclidean distance then d**-alpha.
        _, topo, var = default_setup()
        d_sw = math.dist((-5.0, 0.0), (0.0, -5.0))
        assert d_sw == pytest.approx(math.sqrt(50.0))
        assert var.sw[0] == pytest.approx(d_sw ** -4.0)
        assert var.sw[0] == pytest.approx(4.0e-4)
        assert var.sr[0] == pytest.approx(5.0 ** -4.0) == pytest.approx(1.6e-3)

    def test_coincident_nodes_rejected(self):
        with pytest.raises(ValueError):
            Topology(source=(0.0, 0.0), destination=(0.0, 0.0))
        with pytest.raises(ValueError):
            Topology(relays=((0.0, -5.0 + 0.01),))  # collides with the Willie

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError):
            LinkVariances(
                sr=np.array([0.0]), rd=np.array([1.0]), sw=np.array([1.0]),
                dw=np.array([1.0]), rw=np.array([[1.0]]),
                rr=np.zeros((1, 1)), sd=1.0,
            )


class TestSampleChannels:
    def test_determinism(self):
        params, _, var = default_setup(N_s=4)
        a = sample_channels(var, params, seed=123)
        b = sample_channels(var, params, seed=123)
        for name in ("h_sr", "h_sw", "h_rd", "h_rw", "h_dw", "h_rr", "h_sd"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
        c = sample_channels(var, params, seed=124)
        assert not np.array_equal(a.h_sr, c.h_sr)

    def test_tuple_seeds_give_distinct_streams(self):
        params, _, var = default_setup(N_s=2)
        a = sample_channels(var, params, seed=(7, 0))
        b = sample_channels(var, params, seed=(7, 1))
        assert not np.array_equal(a.h_sr, b.h_sr)

    def test_h_rd_mean_power(self):
        # 1e5 draws of a mu=2 link: sample mean of |h|^2 within 2 +- 0.05.
        params = SystemParams(N_s=1)
        var = LinkVariances(
            sr=np.array([1.0]), rd=np.array([2.0]), sw=np.array([1.0]),
            dw=np.array([1.0]), rw=np.array([[1.0]]), rr=np.zeros((1, 1)), sd=1.0,
        )
        draws = np.array(
            [sample_channels(var, params, seed=(999, t)).h_rd[0] for t in range(100_000)]
        )
        assert np.mean(np.abs(draws) ** 2) == pytest.approx(2.0, abs=0.05)

    def test_statistical_calibration_all_links(self):
        # Empirical mean |h|^2 within 3 standard errors of mu for every link;
        # for an exponential power the standard error is mu / sqrt(N).
        params, _, var = default_setup(N_s=2)
        N = 100_000
        sums = {k: 0.0 for k in ("sr", "rd", "sw", "rw", "dw", "sd")}
        for t in range(N // 10):
            real = sample_channels(var, params, seed=(55, t))
            sums["sr"] += np.sum(np.abs(real.h_sr) ** 2)
            sums["rd"] += np.sum(np.abs(real.h_rd) ** 2)
            sums["sw"] += np.sum(np.abs(real.h_sw) ** 2)
            sums["rw"] += np.sum(np.abs(real.h_rw) ** 2)
            sums["dw"] += np.sum(np.abs(real.h_dw) ** 2)
            sums["sd"] += np.sum(np.abs(real.h_sd) ** 2)
        counts = {"sr": 2 * N // 10, "rd": N // 10, "sw": 2 * N // 10,
                  "rw": N // 10, "dw": N // 10, "sd": 2 * N // 10}
        mus = {"sr": var.sr[0], "rd": var.rd[0], "sw": var.sw[0],
               "rw": var.rw[0, 0], "dw": var.dw[0], "sd": var.sd}
        for name, mu in mus.items():
            mean = sums[name] / counts[name]
            se = mu / math.sqrt(counts[name])
            assert abs(mean - mu) < 3 * se, f"link {name}: {mean} vs {mu}"


class TestMrtWeights:
    def test_already_unit(self):
        w = mrt_weights(np.array([1.0 + 0j, 0.0]))
        np.testing.assert_allclose(w, [1.0, 0.0])

    def test_gain_is_norm_squared(self):
        h = np.array([3.0, 4.0j])
        w = mrt_weights(h)
        assert abs(np.vdot(w, h)) ** 2 == pytest.approx(25.0, rel=1e-12)

    def test_unit_norm_and_real_gain(self):
        rng = rng_from_seed(11)
        for _ in range(100):
            h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            w = mrt_weights(h)
            assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)
            gain = np.vdot(w, h)
            assert gain.imag == pytest.approx(0.0, abs=1e-12)
            assert gain.real >= 0

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            mrt_weights(np.zeros(4, dtype=complex))


class TestLsmaApproximations:
    def test_leakage_mean_is_identity(self):
        assert lsma_leakage_variance(1.0) == 1.0
        assert lsma_leakage_variance(0.37) == 0.37
        with pytest.raises(ValueError):
            lsma_leakage_variance(0.0)

    def test_leakage_sampler_mean(self):
        rng = rng_from_seed(5)
        draws = sample_lsma_leakage(0.5, 200_000, rng)
        assert np.mean(draws) == pytest.approx(0.5, rel=0.02)

    @staticmethod
    def _ks_distance(Ns: int, n_draws: int, rng) -> float:
        # Empirical CDF of the normalized beamforming leakage against the
        # exponential approximation with mean mu_sw.
        mu_sr, mu_sw = 1.6e-3, 4.0e-4
        h_sr = np.sqrt(mu_sr / 2) * (
            rng.standard_normal((n_draws, Ns)) + 1j * rng.standard_normal((n_draws, Ns))
        )
        h_sw = np.sqrt(mu_sw / 2) * (
            rng.standard_normal((n_draws, Ns)) + 1j * rng.standard_normal((n_draws, Ns))
        )
        lam = np.abs(np.einsum("ij,ij->i", h_sr.conj(), h_sw)) ** 2 / (Ns * mu_sr)
        x = np.sort(lam)
        cdf_emp = np.arange(1, n_draws + 1) / n_draws
        cdf_model = -np.expm1(-x / lsma_leakage_variance(mu_sw))
        return float(np.max(np.abs(cdf_emp - cdf_model)))

    def test_ks_small_for_large_array(self):
        rng = rng_from_seed(21)
        assert self._ks_distance(64, 100_000, rng) < 0.02

    def test_ks_worse_for_small_array(self):
        rng = rng_from_seed(22)
        ks_small = self._ks_distance(2, 100_000, rng)
        rng = rng_from_seed(22)
        ks_large = self._ks_distance(64, 100_000, rng)
        assert ks_small > ks_large

    def test_lsma_sinr_arithmetic(self):
        params = SystemParams(N_s=16, P=10.0, sigma2=1e-5)
        assert lsma_sinr_si(params, 1.6e-3) == pytest.approx(25600.0, rel=1e-12)
        with pytest.raises(ValueError):
            lsma_sinr_si(params, 0.0)

    def test_lsma_sinr_single_antenna_mean(self):
        # With one antenna the exact gamma_si is exponential with the lsma
        # value as its mean.
        params = SystemParams(N_s=1, P=10.0, sigma2=1e-5)
        _, _, var = default_setup(N_s=1)
        mu = var.sr[0]
        rng = rng_from_seed(31)
        h = np.sqrt(mu / 2) * (
            rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)
        )
        exact = params.P * np.abs(h) ** 2 / params.sigma2
        assert np.mean(exact) == pytest.approx(lsma_sinr_si(params, mu), rel=0.02)
