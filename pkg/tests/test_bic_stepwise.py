"""BIC arithmetic and bidirectional stepwise selection tests."""

import math

import numpy as np
import pytest

from tonelab.stats.design import CategoricalTerm, ContinuousTerm, DesignSpec
from tonelab.stats.linear import bic_of, bic_value, ols_fit
from tonelab.stats.logistic import logistic_fit
from tonelab.stats.stepwise import stepwise_bic


class TestBic:
    def test_formula_arithmetic(self):
        # 3 ln(100) + 100 = 113.81551055796427
        assert bic_value(3, 100, -50.0) == pytest.approx(113.81551055796427, abs=1e-9)

    def test_doubling_n_adds_k_ln2(self):
        k, ll = 4, -123.4
        assert bic_value(k, 400, ll) - bic_value(k, 200, ll) == pytest.approx(
            k * math.log(2), abs=1e-12
        )

    def test_gaussian_log_likelihood_closed_form(self):
        # independent closed form: -n/2 (ln(2 pi rss/n) + 1)
        rng = np.random.default_rng(8)
        x = rng.uniform(0, 1, 30)
        y = 2 * x + rng.normal(0, 0.3, 30)
        spec = DesignSpec("y", (ContinuousTerm("x", center=False),), {"x": x, "y": y})
        fit = ols_fit(spec)
        resid = y - fit.fitted
        rss = float(resid @ resid)
        expected = -0.5 * 30 * (math.log(2 * math.pi * rss / 30) + 1)
        assert fit.log_lik == pytest.approx(expected, abs=1e-6)
        assert bic_of(fit) == pytest.approx(fit.k * math.log(30) - 2 * expected, abs=1e-6)

    def test_bic_of_uses_fit_fields(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(0, 1, 25)
        y = x + rng.normal(0, 0.1, 25)
        fit = ols_fit(
            DesignSpec("y", (ContinuousTerm("x", center=False),), {"x": x, "y": y})
        )
        assert bic_of(fit) == pytest.approx(fit.bic, abs=1e-12)
        assert fit.k == 3  # intercept, slope, residual variance


def _simulate_table(rng, n=2000, noise_beta=0.0):
    x1 = rng.normal(0, 1, n)
    x2 = rng.normal(0, 1, n)
    noise = rng.normal(0, 1, n)
    y = 2.0 + 1.5 * x1 - 1.0 * x2 + noise_beta * noise + rng.normal(0, 1.0, n)
    return {"x1": x1, "x2": x2, "noise": noise, "y": y}


def _spec(table):
    return DesignSpec(
        "y",
        (
            ContinuousTerm("x1", center=False),
            ContinuousTerm("x2", center=False),
            ContinuousTerm("noise", center=False),
        ),
        table,
    )


class TestStepwise:
    def test_pure_noise_term_dropped_in_most_seeds(self):
        drops = 0
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            result = stepwise_bic(_spec(_simulate_table(rng)))
            if "noise" not in result.selected_terms:
                drops += 1
        assert drops >= 18

    def test_strong_terms_all_retained(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            table = _simulate_table(rng, noise_beta=1.2)
            result = stepwise_bic(_spec(table))
            assert set(result.selected_terms) == {"x1", "x2", "noise"}

    def test_single_strong_term_model_unchanged(self):
        rng = np.random.default_rng(4)
        x = rng.normal(0, 1, 500)
        y = 3 * x + rng.normal(0, 1, 500)
        spec = DesignSpec("y", (ContinuousTerm("x", center=False),), {"x": x, "y": y})
        result = stepwise_bic(spec)
        assert result.selected_terms == ("x",)
        assert len(result.trace) == 1  # only the starting record

    def test_trace_is_monotone_non_increasing(self):
        rng = np.random.default_rng(17)
        result = stepwise_bic(_spec(_simulate_table(rng)))
        bics = [step.bic for step in result.trace]
        assert all(b2 <= b1 + 1e-9 for b1, b2 in zip(bics, bics[1:]))

    def test_dropped_term_can_reenter(self):
        # the search evaluates re-additions from the full term set each step
        rng = np.random.default_rng(2)
        table = _simulate_table(rng)
        result = stepwise_bic(_spec(table))
        actions = {(s.action, s.term) for s in result.trace}
        assert ("start", None) in actions

    def test_categorical_terms_move_as_blocks(self):
        rng = np.random.default_rng(9)
        n = 800
        g = rng.choice(["a", "b", "c"], n)
        x = rng.normal(0, 1, n)
        y = 1.0 + 0.8 * x + rng.normal(0, 1, n)  # group is pure noise
        spec = DesignSpec(
            "y",
            (ContinuousTerm("x", center=False), CategoricalTerm("g")),
            {"x": x, "g": g, "y": y},
        )
        result = stepwise_bic(spec)
        assert "g" not in result.selected_terms
        assert all(not c.startswith("g:") for c in result.fit.columns)

    def test_drives_logistic_fits(self):
        rng = np.random.default_rng(31)
        n = 1500
        x = rng.normal(0, 1, n)
        junk = rng.normal(0, 1, n)
        p = 1 / (1 + np.exp(-(0.3 + 1.2 * x)))
        y = (rng.random(n) < p).astype(float)
        spec = DesignSpec(
            "y",
            (ContinuousTerm("x", center=False), ContinuousTerm("junk", center=False)),
            {"x": x, "junk": junk, "y": y},
        )
        result = stepwise_bic(spec, fitter=logistic_fit)
        assert "x" in result.selected_terms
        assert "junk" not in result.selected_terms
