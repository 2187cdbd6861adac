"""Random-intercept linear mixed model fit by maximum likelihood.

The model is y = X beta + b_group + eps with b ~ N(0, sigma_b^2) per group
and eps ~ N(0, sigma_e^2). The likelihood is profiled over the variance
ratio lambda = sigma_b^2 / sigma_e^2: for a fixed lambda the GLS estimates
and the residual variance have closed forms through per-group sufficient
statistics, leaving a one-dimensional search on log(lambda), with the
lambda = 0 boundary (no group variance) admitted as a candidate. Maximum
likelihood is used rather than REML so BIC values stay comparable with the
other fitters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .design import DesignMatrix, DesignSpec, build_design
from .distributions import Z_975, normal_two_sided_p
from .linear import RankDeficientDesignError, _check_rank, bic_value

_GRID_LOG_LAMBDA = np.arange(-25.0, 15.0 + 0.25, 0.5)
_GOLDEN_TOL = 1e-11
_MAX_GOLDEN_ITER = 200
_FLAT_PROFILE_TOL = 1e-8


@dataclass
class MixedFit:
    """Fixed-effect summary plus the two variance components."""

    columns: tuple[str, ...]
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    t_stats: dict[str, float]  # Wald z statistics
    p_values: dict[str, float]
    conf_int: dict[str, tuple[float, float]]
    sigma_b2: float
    sigma_e2: float
    n_groups: int
    conditional_r2: float
    n: int
    k: int
    log_lik: float
    bic: float
    converged: bool
    diagnostics: list[str] = field(default_factory=list)
    fitted: np.ndarray = field(default=None, repr=False)
    term_of_column: tuple[str, ...] = ()
    kind: str = "lmm"


class _ProfiledDeviance:
    """Per-group sufficient statistics and the profiled log-likelihood."""

    def __init__(self, X: np.ndarray, y: np.ndarray, groups: np.ndarray):
        self.n, self.p = X.shape
        labels, index = np.unique(groups, return_inverse=True)
        self.q = len(labels)
        self.sizes = np.bincount(index).astype(float)
        self.XtX = X.T @ X
        self.Xty = X.T @ y
        self.yty = float(y @ y)
        # per-group column sums of X and sums of y
        self.G = np.zeros((self.q, self.p))
        np.add.at(self.G, index, X)
        self.s = np.bincount(index, weights=y)
        self.group_index = index

    def solve(self, lam: float) -> tuple[np.ndarray, float, float]:
        """GLS coefficients, ML residual variance, profile log-likelihood."""
        w = lam / (1.0 + lam * self.sizes)  # shrinkage weight per group
        A = self.XtX - (self.G * w[:, None]).T @ self.G
        b = self.Xty - self.G.T @ (w * self.s)
        c = self.yty - float(w @ (self.s * self.s))
        beta = np.linalg.solve(A, b)
        quad = c - float(beta @ b)  # r' V^-1 r at the GLS solution
        sigma_e2 = max(quad / self.n, 1e-300)
        log_det = float(np.sum(np.log1p(lam * self.sizes)))
        ll = -0.5 * self.n * (math.log(2.0 * math.pi * sigma_e2) + 1.0) - 0.5 * log_det
        return beta, sigma_e2, ll

    def log_lik(self, lam: float) -> float:
        return self.solve(lam)[2]

    def coef_cov(self, lam: float, sigma_e2: float) -> np.ndarray:
        w = lam / (1.0 + lam * self.sizes)
        A = self.XtX - (self.G * w[:, None]).T @ self.G
        return sigma_e2 * np.linalg.inv(A)


def _golden_max(f, lo: float, hi: float) -> tuple[float, bool]:
    """Golden-section maximum of f on [lo, hi]; returns (argmax, converged)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_MAX_GOLDEN_ITER):
        if b - a < _GOLDEN_TOL:
            return (a + b) / 2.0, True
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2.0, False


def lmm_fit(spec: DesignSpec | DesignMatrix, group: str, table=None) -> MixedFit:
    """Fit the random-intercept model by profiled maximum likelihood.

    ``group`` names the grouping column in the spec's table (or pass a
    DesignMatrix plus ``table``). Wald confidence intervals use the normal
    quantile. Conditional R2 is the share of response variance carried by
    the fixed effects plus the group intercepts.
    """
    if isinstance(spec, DesignMatrix):
        design = spec
        if table is None:
            raise ValueError("pass the observation table when fitting a DesignMatrix")
        groups = np.asarray(table[group])
    else:
        design = build_design(spec)
        groups = np.asarray(spec.table[group])
    X, y, columns = design.X, design.y, design.columns
    n, p = X.shape
    if n <= p:
        raise RankDeficientDesignError(columns)
    _check_rank(X, columns)
    if len(groups) != n:
        raise ValueError(f"group column has {len(groups)} rows, expected {n}")

    prof = _ProfiledDeviance(X, y, groups)
    if prof.q < 2:
        raise ValueError(f"need >= 2 groups, found {prof.q}")

    diagnostics: list[str] = []
    converged = True

    grid_ll = np.array([prof.log_lik(math.exp(u)) for u in _GRID_LOG_LAMBDA])
    ll_zero = prof.log_lik(0.0)
    best_grid = float(np.max(grid_ll))

    if max(best_grid, ll_zero) - min(float(np.min(grid_ll)), ll_zero) < _FLAT_PROFILE_TOL:
        diagnostics.append(
            "variance ratio unidentifiable: profile likelihood is flat "
            "(often one observation per group)"
        )
        lam = 0.0
    elif best_grid <= ll_zero + _FLAT_PROFILE_TOL:
        diagnostics.append("variance ratio at the lambda = 0 boundary")
        lam = 0.0
    else:
        i = int(np.argmax(grid_ll))
        lo = _GRID_LOG_LAMBDA[max(i - 1, 0)]
        hi = _GRID_LOG_LAMBDA[min(i + 1, len(_GRID_LOG_LAMBDA) - 1)]
        u_hat, ok = _golden_max(lambda u: prof.log_lik(math.exp(u)), lo, hi)
        if not ok:
            converged = False
            diagnostics.append("profile search hit the iteration cap")
        if i == 0 or i == len(_GRID_LOG_LAMBDA) - 1:
            diagnostics.append("variance ratio at the search boundary")
        lam = math.exp(u_hat)
        if prof.log_lik(lam) < ll_zero:
            lam = 0.0
            diagnostics.append("variance ratio at the lambda = 0 boundary")

    beta, sigma_e2, log_lik = prof.solve(lam)
    sigma_b2 = lam * sigma_e2
    cov = prof.coef_cov(lam, sigma_e2)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    p_values = [normal_two_sided_p(float(zv)) for zv in z]
    ci = {
        name: (float(b - Z_975 * s), float(b + Z_975 * s))
        for name, b, s in zip(columns, beta, se)
    }

    fitted_fixed = X @ beta
    var_fixed = float(np.var(fitted_fixed))
    denom = var_fixed + sigma_b2 + sigma_e2
    conditional_r2 = (var_fixed + sigma_b2) / denom if denom > 0 else float("nan")

    k = p + 2  # coefficients plus both variance components
    return MixedFit(
        columns=columns,
        coefficients=dict(zip(columns, map(float, beta))),
        std_errors=dict(zip(columns, map(float, se))),
        t_stats=dict(zip(columns, map(float, z))),
        p_values=dict(zip(columns, p_values)),
        conf_int=ci,
        sigma_b2=float(sigma_b2),
        sigma_e2=float(sigma_e2),
        n_groups=prof.q,
        conditional_r2=float(conditional_r2),
        n=n,
        k=k,
        log_lik=float(log_lik),
        bic=bic_value(k, n, float(log_lik)),
        converged=converged,
        diagnostics=diagnostics,
        fitted=fitted_fixed,
        term_of_column=design.term_of_column,
    )
