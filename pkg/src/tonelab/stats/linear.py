"""Ordinary least squares with classical inference, BIC, and lightness ratios."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .design import INTERCEPT, DesignMatrix, DesignSpec, build_design
from .distributions import student_t_two_sided_p


class RankDeficientDesignError(ValueError):
    """The design matrix is not full column rank; names the involved columns."""

    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(f"rank-deficient design, collinear columns: {', '.join(self.columns)}")


@dataclass
class ModelFit:
    """A fitted model summary.

    ``k`` counts every estimated parameter entering the BIC: coefficients
    plus the residual variance for Gaussian models, coefficients alone for
    logistic models.
    """

    columns: tuple[str, ...]
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    t_stats: dict[str, float]
    p_values: dict[str, float]
    n: int
    k: int
    log_lik: float
    bic: float
    adj_r2: float | None = None
    rss: float | None = None
    sigma2: float | None = None
    fitted: np.ndarray = field(default=None, repr=False)
    residuals: np.ndarray = field(default=None, repr=False)
    term_of_column: tuple[str, ...] = ()
    kind: str = "ols"
    deviance_path: tuple[float, ...] = ()  # logistic fits record IRLS progress

    def coefficient_array(self) -> np.ndarray:
        return np.array([self.coefficients[c] for c in self.columns])


def _check_rank(X: np.ndarray, columns) -> None:
    if X.shape[0] < X.shape[1]:
        raise RankDeficientDesignError(columns)
    # SVD-based rank check; the null-space vector names the collinear columns
    u, s, vt = np.linalg.svd(X, full_matrices=False)
    tol = s[0] * max(X.shape) * np.finfo(float).eps if s[0] > 0 else 0.0
    if s[-1] <= tol:
        null = np.abs(vt[-1])
        involved = [c for c, w in zip(columns, null) if w > 0.1 * null.max()]
        raise RankDeficientDesignError(involved)


def gaussian_log_likelihood(rss: float, n: int) -> float:
    """Gaussian log-likelihood at the MLE variance sigma2 = rss / n."""
    if n == 0:
        return 0.0
    sigma2 = max(rss / n, 1e-300)
    return -0.5 * n * (np.log(2.0 * np.pi * sigma2) + 1.0)


def bic_value(k: int, n: int, log_lik: float) -> float:
    return k * np.log(n) - 2.0 * log_lik


def bic_of(fit: ModelFit) -> float:
    """Bayesian information criterion, k*ln(n) - 2*ln(L)."""
    return bic_value(fit.k, fit.n, fit.log_lik)


def ols_fit(spec: DesignSpec | DesignMatrix) -> ModelFit:
    """Least squares with t-based inference.

    Standard errors come from the unbiased residual variance and the
    inverse Gram matrix; p-values are two-sided Student-t on n - k_coef
    degrees of freedom; the reported log-likelihood is the Gaussian value
    at the ML variance so BIC comparisons are coherent across models.
    """
    design = spec if isinstance(spec, DesignMatrix) else build_design(spec)
    X, y, columns = design.X, design.y, design.columns
    n, p = X.shape
    if n <= p:
        raise RankDeficientDesignError(columns)
    _check_rank(X, columns)

    q, r = np.linalg.qr(X)
    beta = np.linalg.solve(r, q.T @ y)
    fitted = X @ beta
    resid = y - fitted
    rss = float(resid @ resid)

    df = n - p
    s2 = rss / df
    r_inv = np.linalg.solve(r, np.eye(p))
    cov = s2 * (r_inv @ r_inv.T)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    p_values = np.array([student_t_two_sided_p(float(tv), df) for tv in t])

    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / df if df > 0 else float("nan")

    log_lik = gaussian_log_likelihood(rss, n)
    k = p + 1  # coefficients plus the residual variance
    return ModelFit(
        columns=columns,
        coefficients=dict(zip(columns, map(float, beta))),
        std_errors=dict(zip(columns, map(float, se))),
        t_stats=dict(zip(columns, map(float, t))),
        p_values=dict(zip(columns, map(float, p_values))),
        n=n,
        k=k,
        log_lik=log_lik,
        bic=bic_value(k, n, log_lik),
        adj_r2=float(adj_r2),
        rss=rss,
        sigma2=rss / n,
        fitted=fitted,
        residuals=resid,
        term_of_column=design.term_of_column,
        kind="ols",
    )


def l_star_ratios(
    fit: ModelFit | Mapping[str, float], lightness_term: str = "lightness"
) -> dict[str, float]:
    """Each coefficient divided by the lightness coefficient.

    Expresses every covariate's effect in lightness-equivalent units. The
    intercept is skipped; the lightness term itself maps to 1.
    """
    coefs = fit.coefficients if hasattr(fit, "coefficients") else dict(fit)
    if lightness_term not in coefs:
        raise KeyError(f"lightness term {lightness_term!r} not among {list(coefs)}")
    beta_l = coefs[lightness_term]
    if beta_l == 0.0:
        raise ZeroDivisionError("lightness coefficient is exactly 0")
    return {
        name: beta / beta_l
        for name, beta in coefs.items()
        if name != INTERCEPT
    }
