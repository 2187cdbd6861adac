"""Logistic regression by iteratively reweighted least squares.

Maximum likelihood with Newton steps expressed as weighted least squares,
plus step halving so the deviance never increases between iterations.
Perfect separation shows up as divergence of the linear predictor; it is
detected and reported rather than returned as a huge unstable fit.
"""

from __future__ import annotations

import numpy as np

from .design import DesignMatrix, DesignSpec, build_design
from .distributions import normal_two_sided_p
from .linear import ModelFit, RankDeficientDesignError, _check_rank, bic_value


class SeparationError(RuntimeError):
    """The classes are (quasi-)separable, so the MLE diverges."""


class ConvergenceError(RuntimeError):
    """IRLS failed to converge within the iteration cap."""


_MAX_ETA = 30.0  # |linear predictor| beyond this with perfect classification => separation


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(eta, -700, 700)))


def _deviance(y: np.ndarray, eta: np.ndarray) -> float:
    # numerically stable -2 log L via log1p(exp(.))
    ll = y * eta - np.logaddexp(0.0, eta)
    return -2.0 * float(np.sum(ll))


def logistic_fit(
    spec: DesignSpec | DesignMatrix,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> ModelFit:
    """Fit a binary-response model; returns Wald inference and BIC.

    The response column must contain only 0 and 1. ``k`` for BIC counts the
    coefficients (there is no separate variance parameter).
    """
    design = spec if isinstance(spec, DesignMatrix) else build_design(spec)
    X, y, columns = design.X, design.y, design.columns
    n, p = X.shape
    if not np.all(np.isin(y, (0.0, 1.0))):
        bad = sorted(set(y) - {0.0, 1.0})
        raise ValueError(f"response must be binary 0/1, found {bad[:5]}")
    if n <= p:
        raise RankDeficientDesignError(columns)
    _check_rank(X, columns)

    beta = np.zeros(p)
    eta = X @ beta
    dev = _deviance(y, eta)
    path = [dev]
    converged = False
    for _ in range(max_iter):
        mu = _sigmoid(eta)
        w = mu * (1.0 - mu)
        w = np.maximum(w, 1e-10)
        # Newton direction via weighted least squares
        sw = np.sqrt(w)
        z = eta + (y - mu) / w
        direction, *_ = np.linalg.lstsq(X * sw[:, None], z * sw, rcond=None)
        direction -= beta

        step = 1.0
        for _ in range(30):
            candidate = beta + step * direction
            cand_eta = X @ candidate
            cand_dev = _deviance(y, cand_eta)
            if cand_dev <= dev + 1e-12:
                break
            step /= 2.0
        else:
            raise ConvergenceError("step halving failed to reduce the deviance")

        delta = abs(dev - cand_dev)
        beta, eta, dev = candidate, cand_eta, cand_dev
        path.append(dev)
        _check_separation(y, eta, beta)
        if delta < tol * (abs(dev) + tol):
            converged = True
            break
    if not converged:
        raise ConvergenceError(f"IRLS did not converge in {max_iter} iterations")

    mu = _sigmoid(eta)
    w = np.maximum(mu * (1.0 - mu), 1e-10)
    fisher = (X * w[:, None]).T @ X
    cov = np.linalg.inv(fisher)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        z_stats = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    p_values = [normal_two_sided_p(float(zv)) for zv in z_stats]

    log_lik = -dev / 2.0
    k = p
    return ModelFit(
        columns=columns,
        coefficients=dict(zip(columns, map(float, beta))),
        std_errors=dict(zip(columns, map(float, se))),
        t_stats=dict(zip(columns, map(float, z_stats))),
        p_values=dict(zip(columns, p_values)),
        n=n,
        k=k,
        log_lik=log_lik,
        bic=bic_value(k, n, log_lik),
        adj_r2=None,
        fitted=mu,
        residuals=y - mu,
        term_of_column=design.term_of_column,
        kind="logistic",
        deviance_path=tuple(path),
    )


def _check_separation(y: np.ndarray, eta: np.ndarray, beta: np.ndarray) -> None:
    signed = (2.0 * y - 1.0) * eta
    if np.max(np.abs(eta)) > _MAX_ETA and np.all(signed > 0):
        raise SeparationError(
            "perfect separation: linear predictor diverged "
            f"(max |eta| = {np.max(np.abs(eta)):.1f})"
        )
