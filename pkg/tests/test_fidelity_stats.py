import numpy as np
import pytest

from phaseqpt.fidelity_stats import (
    CampaignConfig,
    FidelitySample,
    Gx2Coeffs,
    compare_protocols,
    empirical_density,
    gx2_fit,
    gx2_moments,
    gx2_sample,
    run_campaign,
    true_chi,
)
from phaseqpt.tomography import MleOptions


@pytest.fixture(scope="module")
def tet_campaign():
    # shared desk-scale campaign: SQiSW under p=0.5 depolarizing noise
    cfg = CampaignConfig(gate="sqiswap", noise_p=0.5, protocols=("tetrahedron",),
                         shots=20_000, runs=60, base_seed=2000)
    return run_campaign(cfg)["tetrahedron"]


class TestRunCampaign:
    def test_exact_probability_consistency(self):
        cfg = CampaignConfig(
            gate="sqiswap", noise_p=0.5, protocols=("tetrahedron",),
            shots=10**9, runs=1, base_seed=1,
            mle=MleOptions(max_iterations=50_000, rel_tol=1e-14), exact=True)
        sample = run_campaign(cfg, n_workers=1)["tetrahedron"][0]
        assert sample.dF < 1e-6

    def test_deterministic_and_worker_independent(self):
        cfg = CampaignConfig(gate="sqiswap", noise_p=0.5,
                             protocols=("tetrahedron",), shots=3000, runs=4,
                             base_seed=11)
        serial = run_campaign(cfg, n_workers=1)["tetrahedron"]
        parallel = run_campaign(cfg, n_workers=2)["tetrahedron"]
        assert [s.dF for s in serial] == [s.dF for s in parallel]
        assert [s.seed for s in serial] == [11, 12, 13, 14]
        assert [s.run_index for s in serial] == [0, 1, 2, 3]

    def test_doubling_shots_halves_mean_loss(self):
        means = {}
        for shots in (50_000, 100_000):
            cfg = CampaignConfig(gate="sqiswap", noise_p=0.5,
                                 protocols=("tetrahedron",), shots=shots,
                                 runs=16, base_seed=100)
            samples = run_campaign(cfg)["tetrahedron"]
            means[shots] = np.mean([s.dF for s in samples])
        ratio = means[50_000] / means[100_000]
        assert 2.0 * 0.8 < ratio < 2.0 * 1.2

    def test_tetrahedron_beats_standard(self):
        cfg = CampaignConfig(gate="sqiswap", noise_p=0.5, shots=20_000,
                             runs=8, base_seed=7)
        out = run_campaign(cfg)
        mean_std = np.mean([s.dF for s in out["standard"]])
        mean_tet = np.mean([s.dF for s in out["tetrahedron"]])
        assert mean_std / mean_tet > 1

    def test_ideal_gate_loss_decreases_with_shots(self):
        # a noiseless gate has a rank-1 chi on the boundary of the positive
        # cone, where the mean loss falls like 1/sqrt(N) (truncated-eigenvalue
        # statistics), not the interior 1/N; assert the direction only
        means = {}
        for shots in (25_000, 50_000):
            cfg = CampaignConfig(gate="sqiswap", noise_p=0.0,
                                 protocols=("tetrahedron",), shots=shots,
                                 runs=12, base_seed=300)
            samples = run_campaign(cfg)["tetrahedron"]
            means[shots] = np.mean([s.dF for s in samples])
        assert means[25_000] > means[50_000] > 0

    def test_samples_in_unit_interval(self, tet_campaign):
        assert all(0.0 <= s.dF <= 1.0 for s in tet_campaign)
        assert all(s.dF == pytest.approx(1 - s.fidelity, abs=1e-12)
                   for s in tet_campaign)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            CampaignConfig(gate="sqiswap", noise_p=0.5, runs=0)
        with pytest.raises(ValueError):
            CampaignConfig(gate="sqiswap", noise_p=1.5)


def test_true_chi_dimensions():
    chi = true_chi("sqiswap", 0.5)
    assert chi.dim == 4
    assert np.trace(chi.matrix).real == pytest.approx(1.0, abs=1e-12)


class TestGx2Moments:
    def test_single_unit_coefficient(self):
        assert gx2_moments(Gx2Coeffs((1.0,))) == (1.0, 2.0)

    def test_three_unit_coefficients(self):
        assert gx2_moments(Gx2Coeffs((1.0, 1.0, 1.0))) == (3.0, 6.0)

    def test_mixed_coefficients(self):
        mean, var = gx2_moments(Gx2Coeffs((0.5, 0.25)))
        assert mean == pytest.approx(0.75)
        assert var == pytest.approx(0.625)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Gx2Coeffs((0.5, -0.1))


class TestGx2Sample:
    def test_empty_coefficients_all_zero(self):
        assert np.array_equal(gx2_sample(Gx2Coeffs(()), 100, 1), np.zeros(100))

    def test_single_dof_mean(self):
        x = gx2_sample(Gx2Coeffs((1.0,)), 1_000_000, 3)
        assert abs(x.mean() - 1.0) < 0.01

    def test_two_coefficient_variance(self):
        x = gx2_sample(Gx2Coeffs((2.0, 3.0)), 1_000_000, 4)
        assert abs(x.var() - 26.0) / 26.0 < 0.02

    def test_deterministic(self):
        c = Gx2Coeffs((0.5, 1.5))
        assert np.array_equal(gx2_sample(c, 1000, 9), gx2_sample(c, 1000, 9))


class TestGx2Fit:
    def test_round_trip_240_dof(self):
        c = Gx2Coeffs((1.0,) * 240)
        x = gx2_sample(c, 200_000, 5)
        fitted = gx2_fit(x, j_max=240)
        assert abs(fitted.effective_dof - 240) / 240 < 0.05

    def test_moments_match_exactly(self):
        rng = np.random.default_rng(6)
        x = rng.gamma(3.0, 2.0, 5000)
        fitted = gx2_fit(x, j_max=100)
        mean, var = gx2_moments(fitted)
        assert mean == pytest.approx(x.mean(), rel=1e-12)
        assert var == pytest.approx(x.var(ddof=1), rel=1e-9)

    def test_coefficients_nonnegative(self):
        rng = np.random.default_rng(7)
        x = rng.chisquare(5, 2000)
        fitted = gx2_fit(x, j_max=50)
        assert all(c >= 0 for c in fitted.coefficients)

    def test_j_max_caps_coefficients(self):
        rng = np.random.default_rng(8)
        x = rng.chisquare(30, 4000)
        fitted = gx2_fit(x, j_max=3)
        assert len(fitted.coefficients) == 3
        # with j_max below the effective dof only the mean is matched
        assert gx2_moments(fitted)[0] == pytest.approx(x.mean(), rel=1e-12)

    def test_degenerate_samples_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            gx2_fit(np.full(100, 0.25), j_max=10)

    def test_negative_samples_rejected(self):
        with pytest.raises(ValueError):
            gx2_fit(np.array([0.1, -0.2, 0.3]), j_max=5)


class TestEmpiricalDensity:
    def test_uniform_is_flat(self):
        rng = np.random.default_rng(10)
        x = rng.uniform(0, 1, 200_000)
        centers, density = empirical_density(x, 10)
        assert np.max(np.abs(density - 1.0)) < 0.05

    def test_integrates_to_one(self):
        rng = np.random.default_rng(11)
        x = rng.gamma(2.0, 1.0, 5000)
        centers, density = empirical_density(x, 17)
        width = centers[1] - centers[0]
        assert np.sum(density) * width == pytest.approx(1.0, abs=1e-12)

    def test_campaign_density_right_skewed(self, tet_campaign):
        d = np.array([s.dF for s in tet_campaign])
        m, s = d.mean(), d.std()
        skew = float(np.mean(((d - m) / s) ** 3))
        assert skew > 0
        centers, density = empirical_density(d, 12)
        width = centers[1] - centers[0]
        assert np.sum(density) * width == pytest.approx(1.0, abs=1e-12)

    def test_empty_samples_rejected(self):
        with pytest.raises(ValueError):
            empirical_density([], 10)

    def test_too_few_bins_rejected(self):
        with pytest.raises(ValueError):
            empirical_density([0.1, 0.2], 1)


class TestCompareProtocols:
    def test_identical_sets_ratio_one(self):
        x = [0.1, 0.2, 0.3]
        report = compare_protocols(x, x)
        assert report["ratio"] == pytest.approx(1.0)

    def test_synthetic_ratio(self):
        rng = np.random.default_rng(12)
        a = 2.5 + 0.0 * rng.uniform(size=400)
        b = 1.0 + 0.0 * rng.uniform(size=400)
        report = compare_protocols(a, b)
        assert report["ratio"] == pytest.approx(2.5)
        assert report["ci_low"] == pytest.approx(2.5)
        assert report["ci_high"] == pytest.approx(2.5)

    def test_accepts_fidelity_samples(self):
        mk = lambda i, f: FidelitySample(i, f, 1 - f, i, True, 10)
        a = [mk(i, 0.9) for i in range(5)]
        b = [mk(i, 0.95) for i in range(5)]
        report = compare_protocols(a, b)
        assert report["ratio"] == pytest.approx(2.0)

    def test_bootstrap_ci_brackets_ratio(self):
        rng = np.random.default_rng(13)
        a = rng.gamma(5, 0.02, 300)
        b = rng.gamma(5, 0.01, 300)
        report = compare_protocols(a, b)
        assert report["ci_low"] < report["ratio"] < report["ci_high"]
        assert report["ci_low"] > 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            compare_protocols([], [0.1])
