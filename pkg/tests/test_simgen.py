"""Generator checks: determinism, split handling, and Monte Carlo shape
of the injected correlation structures."""

from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from vbda import (
    COV_SPECS,
    DataValidationError,
    SimSetting,
    ar1_sample,
    derive_seed,
    generate,
    setting_from_index,
    uniform_corr_sample,
)


def custom(**kw):
    base = dict(
        mean_spec="custom",
        cov_spec="independence",
        signal_count=2,
        signal_mean=1.0,
        p=6,
        n_train=40,
        n_valid=0,
        n_test=0,
        seed=0,
    )
    base.update(kw)
    return SimSetting(**base)


class TestSimSetting:
    def test_signal_counts_per_mean_spec(self):
        assert SimSetting(mean_spec="s1").p1 == 50
        assert SimSetting(mean_spec="s2").p1 == 100
        assert SimSetting(mean_spec="s3").p1 == 200
        assert SimSetting(mean_spec="s4").p1 == 10
        assert custom(signal_count=3).p1 == 3

    def test_default_correlations(self):
        assert SimSetting(cov_spec="independence").effective_rho == 0.0
        assert SimSetting(cov_spec="block_ar1").effective_rho == 0.6
        assert SimSetting(cov_spec="global_ar1").effective_rho == 0.9
        assert SimSetting(cov_spec="uniform").effective_rho == 0.8
        assert SimSetting(cov_spec="global_ar1", rho=0.3).effective_rho == 0.3

    def test_custom_requires_signal_fields(self):
        with pytest.raises(DataValidationError):
            SimSetting(mean_spec="custom", signal_count=2)
        with pytest.raises(DataValidationError):
            SimSetting(mean_spec="custom", signal_mean=1.0)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(mean_spec="s9"),
            dict(cov_spec="toeplitz"),
            dict(mean_spec="s2", p=50),  # needs 100 signal columns
            dict(n_train=3),
            dict(n_valid=-1),
            dict(delta_sigma=-0.5),
            dict(rho=1.0),
            dict(cov_spec="uniform", rho=-0.1),
            dict(cov_spec="block_ar1", p=150),  # blocks of 100 must tile p
        ],
    )
    def test_invalid_settings_rejected(self, kw):
        with pytest.raises(DataValidationError):
            SimSetting(**kw)

    def test_index_grid_layout(self):
        s1 = setting_from_index(1)
        assert (s1.mean_spec, s1.cov_spec) == ("s1", "independence")
        s4 = setting_from_index(4)
        assert (s4.mean_spec, s4.cov_spec) == ("s4", "independence")
        s5 = setting_from_index(5)
        assert (s5.mean_spec, s5.cov_spec) == ("s1", "block_ar1")
        s16 = setting_from_index(16)
        assert (s16.mean_spec, s16.cov_spec) == ("s4", "uniform")
        covs = {setting_from_index(i).cov_spec for i in range(1, 17)}
        assert covs == set(COV_SPECS)

    @pytest.mark.parametrize("index", [0, 17, -3])
    def test_index_out_of_range(self, index):
        with pytest.raises(DataValidationError):
            setting_from_index(index)

    def test_index_overrides_forwarded(self):
        s = setting_from_index(2, p=300, n_train=60, delta_sigma=1.5)
        assert (s.p, s.n_train, s.delta_sigma) == (300, 60, 1.5)


class TestGenerate:
    def test_deterministic_given_seed(self):
        s = setting_from_index(1, p=100, n_train=20, n_valid=10, n_test=10, seed=11)
        a, b = generate(s), generate(s)
        np.testing.assert_array_equal(a.train.X, b.train.X)
        np.testing.assert_array_equal(a.train.y, b.train.y)
        np.testing.assert_array_equal(a.test.X, b.test.X)
        c = generate(setting_from_index(1, p=100, n_train=20, n_valid=10, n_test=10, seed=12))
        assert not np.array_equal(a.train.X, c.train.X)

    def test_split_shapes_and_columns(self):
        s = custom(p=7, signal_count=2, n_train=12, n_valid=5, n_test=9)
        rep = generate(s)
        assert rep.train.X.shape == (12, 7)
        assert rep.valid.X.shape == (5, 7)
        assert rep.test.X.shape == (9, 7)
        assert rep.train.columns == tuple(f"v{j}" for j in range(1, 8))
        assert rep.train.columns == rep.test.columns

    def test_empty_splits_are_none(self):
        rep = generate(custom(n_valid=0, n_test=0))
        assert rep.valid is None
        assert rep.test is None
        assert rep.train is not None

    def test_truth_mask_is_leading_block(self):
        rep = generate(setting_from_index(1, p=120, n_train=10, n_valid=0, n_test=0))
        assert rep.gamma_true.dtype == np.bool_
        assert rep.gamma_true[:50].all()
        assert not rep.gamma_true[50:].any()

    def test_fixed_mean_specs(self):
        rep = generate(setting_from_index(1, p=60, n_train=10, n_valid=0, n_test=0))
        np.testing.assert_array_equal(rep.mu1[:50], 0.7)
        np.testing.assert_array_equal(rep.mu1[50:], 0.0)
        rep2 = generate(
            setting_from_index(2, p=150, n_train=10, n_valid=0, n_test=0)
        )
        np.testing.assert_array_equal(rep2.mu1[:100], 0.3)

    def test_random_means_redrawn_per_replicate(self):
        s = setting_from_index(4, p=20, n_train=10, n_valid=0, n_test=0)
        a = generate(s)
        b = generate(replace(s, seed=1))
        assert not np.array_equal(a.mu1[:10], b.mu1[:10])
        # per-signal draws differ within one replicate too
        assert np.std(a.mu1[:10]) > 0.0
        np.testing.assert_array_equal(a.mu1[10:], 0.0)

    @pytest.mark.invariant
    def test_random_mean_distribution(self):
        draws = np.concatenate(
            [
                generate(
                    setting_from_index(4, p=10, n_train=10, n_valid=0, n_test=0, seed=s)
                ).mu1
                for s in range(60)
            ]
        )
        assert draws.mean() == pytest.approx(0.5, abs=0.05)
        assert draws.std() == pytest.approx(0.3, abs=0.05)

    def test_group_means_shifted(self):
        rep = generate(custom(signal_mean=2.0, n_train=4000, seed=3))
        d = rep.train
        on1 = d.X[d.y == 1]
        on0 = d.X[d.y == 0]
        assert on1[:, 0].mean() == pytest.approx(2.0, abs=0.1)
        assert on0[:, 0].mean() == pytest.approx(0.0, abs=0.1)
        assert on1[:, 5].mean() == pytest.approx(0.0, abs=0.1)

    def test_delta_sigma_scales_group0_signals_only(self):
        rep = generate(custom(signal_mean=0.0, delta_sigma=1.0, n_train=4000, seed=5))
        d = rep.train
        sd0 = d.X[d.y == 0].std(axis=0, ddof=1)
        sd1 = d.X[d.y == 1].std(axis=0, ddof=1)
        np.testing.assert_allclose(sd0[:2], 2.0, atol=0.15)
        np.testing.assert_allclose(sd0[2:], 1.0, atol=0.1)
        np.testing.assert_allclose(sd1, 1.0, atol=0.1)
        np.testing.assert_array_equal(rep.sigma0[:2], 2.0)
        np.testing.assert_array_equal(rep.sigma0[2:], 1.0)

    def test_minimum_group_occupancy(self):
        for seed in range(50):
            d = generate(custom(n_train=4, seed=seed)).train
            assert d.n1 >= 2 and d.n0 >= 2

    @pytest.mark.invariant
    def test_noise_columns_standard_normal(self):
        rep = generate(custom(p=3, signal_count=1, n_train=2000, seed=17))
        for j in (1, 2):
            _, pval = stats.kstest(rep.train.X[:, j], "norm")
            assert pval > 0.001

    @pytest.mark.invariant
    def test_labels_balanced(self):
        ys = np.concatenate(
            [generate(custom(n_train=200, seed=s)).train.y for s in range(20)]
        )
        assert abs(ys.mean() - 0.5) < 0.03


class TestCorrelationStructures:
    @pytest.mark.invariant
    def test_ar1_lag_profile(self):
        z = ar1_sample(4, 0.9, 200_000, seed=0)
        c = np.corrcoef(z, rowvar=False)
        assert c[0, 1] == pytest.approx(0.9, abs=0.01)
        assert c[1, 2] == pytest.approx(0.9, abs=0.01)
        assert c[0, 2] == pytest.approx(0.81, abs=0.01)
        assert c[0, 3] == pytest.approx(0.729, abs=0.01)
        np.testing.assert_allclose(z.var(axis=0), 1.0, atol=0.02)

    def test_ar1_zero_rho_independent(self):
        z = ar1_sample(3, 0.0, 50_000, seed=1)
        c = np.corrcoef(z, rowvar=False)
        assert abs(c[0, 1]) < 0.02 and abs(c[0, 2]) < 0.02

    @pytest.mark.invariant
    def test_block_boundaries_break_the_chain(self):
        z = ar1_sample(4, 0.9, 100_000, seed=2, block_size=2)
        c = np.corrcoef(z, rowvar=False)
        assert c[0, 1] == pytest.approx(0.9, abs=0.01)
        assert c[2, 3] == pytest.approx(0.9, abs=0.01)
        assert abs(c[1, 2]) < 0.02
        assert abs(c[0, 3]) < 0.02

    @pytest.mark.invariant
    def test_uniform_offdiagonal(self):
        z = uniform_corr_sample(5, 0.8, 100_000, seed=3)
        c = np.corrcoef(z, rowvar=False)
        off = c[~np.eye(5, dtype=bool)]
        np.testing.assert_allclose(off, 0.8, atol=0.01)
        np.testing.assert_allclose(z.var(axis=0), 1.0, atol=0.02)

    def test_sampler_domain_errors(self):
        with pytest.raises(DataValidationError):
            ar1_sample(3, 1.0, 10, seed=0)
        with pytest.raises(DataValidationError):
            uniform_corr_sample(3, -0.2, 10, seed=0)
        with pytest.raises(DataValidationError):
            uniform_corr_sample(3, 1.0, 10, seed=0)

    def test_generate_applies_structure(self):
        s = setting_from_index(
            9, p=200, n_train=5000, n_valid=0, n_test=0, delta_sigma=0.0, seed=9
        )
        rep = generate(s)  # s1 mean spec under global AR(1), rho 0.9
        noise = rep.train.X[:, 200 - 2 :]
        c = np.corrcoef(noise, rowvar=False)
        assert c[0, 1] == pytest.approx(0.9, abs=0.05)


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(42, 3, 7) == derive_seed(42, 3, 7)

    def test_distinct_across_indices(self):
        seen = {derive_seed(42, i, j) for i in range(10) for j in range(10)}
        assert len(seen) == 100

    def test_depends_on_base(self):
        assert derive_seed(1, 0) != derive_seed(2, 0)

    def test_arity_matters(self):
        assert derive_seed(5) != derive_seed(5, 0)
