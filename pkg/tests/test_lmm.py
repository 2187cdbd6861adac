"""Random-intercept mixed model tests.

The statsmodels MixedLM maximum-likelihood fit serves as the independent
oracle for a moderate dataset; degenerate and planted-recovery cases check
the profiled search directly.
"""

import numpy as np
import pytest

from tonelab.stats.design import ContinuousTerm, DesignSpec
from tonelab.stats.linear import ols_fit
from tonelab.stats.mixed import lmm_fit


def make_dataset(
    rng, n_groups, per_group, sigma_b, sigma_e, beta=(2.0, 1.5, -0.8),
    group_centered_noise=False,
):
    n = n_groups * per_group
    group = np.repeat([f"g{i}" for i in range(n_groups)], per_group)
    x1 = rng.normal(0, 1, n)
    x2 = rng.normal(0, 1, n)
    b = rng.normal(0, sigma_b, n_groups)
    eps = rng.normal(0, sigma_e, n)
    if group_centered_noise:
        # remove every trace of group-level variance from the noise, so the
        # variance ratio MLE sits exactly on the 0 boundary
        eps = eps - eps.reshape(n_groups, per_group).mean(axis=1).repeat(per_group)
    y = beta[0] + beta[1] * x1 + beta[2] * x2 + np.repeat(b, per_group) + eps
    table = {"y": y, "x1": x1, "x2": x2, "group": group}
    spec = DesignSpec(
        "y",
        (ContinuousTerm("x1", center=False), ContinuousTerm("x2", center=False)),
        table,
    )
    return spec, table


class TestDegenerateCases:
    def test_zero_group_variance_matches_ols(self):
        rng = np.random.default_rng(5)
        spec, _ = make_dataset(
            rng, 24, 50, sigma_b=0.0, sigma_e=1.0, group_centered_noise=True
        )
        mixed = lmm_fit(spec, group="group")
        ols = ols_fit(spec)
        for c in ols.columns:
            assert mixed.coefficients[c] == pytest.approx(ols.coefficients[c], abs=1e-6)
        assert mixed.sigma_b2 < 1e-6

    def test_near_zero_group_variance_shrinks(self):
        # iid noise only: the variance estimate may sit slightly above the
        # boundary by sampling noise, but stays tiny
        rng = np.random.default_rng(5)
        spec, _ = make_dataset(rng, 24, 50, sigma_b=0.0, sigma_e=1.0)
        mixed = lmm_fit(spec, group="group")
        assert mixed.sigma_b2 < 0.05
        ols = ols_fit(spec)
        for c in ols.columns:
            assert mixed.coefficients[c] == pytest.approx(ols.coefficients[c], abs=1e-3)

    def test_single_observation_per_group_reports_diagnostic(self):
        rng = np.random.default_rng(6)
        n = 40
        table = {"y": rng.normal(0, 1, n), "group": [f"g{i}" for i in range(n)]}
        spec = DesignSpec("y", (), table)
        fit = lmm_fit(spec, group="group")
        assert any("unidentifiable" in d for d in fit.diagnostics)

    def test_needs_two_groups(self):
        table = {"y": [1.0, 2.0, 3.0], "group": ["a", "a", "a"]}
        with pytest.raises(ValueError, match="groups"):
            lmm_fit(DesignSpec("y", (), table), group="group")


class TestRecovery:
    def test_planted_effects_recovered_across_seeds(self):
        beta = (2.0, 1.5, -0.8)
        ok_fixed = 0
        sigma_b_estimates = []
        sigma_e_estimates = []
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            spec, _ = make_dataset(rng, 24, 250, sigma_b=2.0, sigma_e=1.0, beta=beta)
            fit = lmm_fit(spec, group="group")
            within = all(
                abs(fit.coefficients[c] - b) <= 3 * fit.std_errors[c]
                for c, b in zip(fit.columns, beta)
            )
            ok_fixed += within
            sigma_b_estimates.append(fit.sigma_b2)
            sigma_e_estimates.append(fit.sigma_e2)
        assert ok_fixed >= 19  # ~99.7% coverage per coefficient
        assert np.mean(sigma_b_estimates) == pytest.approx(4.0, rel=0.30)
        assert np.mean(sigma_e_estimates) == pytest.approx(1.0, rel=0.30)

    def test_profile_optimum_beats_lambda_zero(self):
        rng = np.random.default_rng(9)
        spec, _ = make_dataset(rng, 12, 40, sigma_b=1.0, sigma_e=1.0)
        mixed = lmm_fit(spec, group="group")
        ols = ols_fit(spec)  # the lambda = 0 model
        assert mixed.log_lik >= ols.log_lik - 1e-8

    def test_matches_statsmodels_ml_oracle(self):
        statsmodels = pytest.importorskip("statsmodels.api")
        rng = np.random.default_rng(11)
        spec, table = make_dataset(rng, 20, 30, sigma_b=1.3, sigma_e=0.9)
        fit = lmm_fit(spec, group="group")

        X = np.column_stack([np.ones(600), table["x1"], table["x2"]])
        model = statsmodels.MixedLM(table["y"], X, groups=np.asarray(table["group"]))
        ref = model.fit(reml=False, method="lbfgs")
        np.testing.assert_allclose(
            [fit.coefficients[c] for c in fit.columns], ref.fe_params, atol=1e-4
        )
        np.testing.assert_allclose(fit.sigma_e2, ref.scale, rtol=1e-3)
        np.testing.assert_allclose(
            fit.sigma_b2, float(np.asarray(ref.cov_re)[0, 0]), rtol=1e-2, atol=1e-4
        )
        np.testing.assert_allclose(fit.log_lik, ref.llf, atol=1e-4)
        np.testing.assert_allclose(
            [fit.std_errors[c] for c in fit.columns], ref.bse_fe, rtol=1e-2
        )

    def test_confidence_intervals_bracket_estimates(self):
        rng = np.random.default_rng(13)
        spec, _ = make_dataset(rng, 10, 25, sigma_b=0.8, sigma_e=1.0)
        fit = lmm_fit(spec, group="group")
        for c in fit.columns:
            lo, hi = fit.conf_int[c]
            assert lo < fit.coefficients[c] < hi
            half = 1.959963984540054 * fit.std_errors[c]
            assert hi - fit.coefficients[c] == pytest.approx(half, rel=1e-9)

    def test_conditional_r2_definition(self):
        rng = np.random.default_rng(15)
        spec, _ = make_dataset(rng, 16, 40, sigma_b=1.0, sigma_e=1.0)
        fit = lmm_fit(spec, group="group")
        var_f = float(np.var(fit.fitted))
        expected = (var_f + fit.sigma_b2) / (var_f + fit.sigma_b2 + fit.sigma_e2)
        assert fit.conditional_r2 == pytest.approx(expected, abs=1e-12)
        assert 0.0 <= fit.conditional_r2 <= 1.0
