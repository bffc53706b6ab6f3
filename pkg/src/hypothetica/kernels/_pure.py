"""Numpy/scipy implementation of the regression kernels.

Mirrors ``_compiled`` (the Cython core) operation for operation; both
backends run the same algorithms so results agree to rounding error.
Status codes, not exceptions, signal failures — the public wrappers in
``kernels`` translate them.
"""

import numpy as np
import scipy.linalg
from scipy.special import expit as _sp_expit

BACKEND_NAME = "numpy"

# ols_core status codes
OLS_OK = 0
OLS_RANK_DEFICIENT = 1

# logistic_core status codes
LOGIT_CONVERGED_COEF = 0
LOGIT_CONVERGED_LL = 1
LOGIT_MAX_ITER = 2
LOGIT_SEPARATION = 3
LOGIT_SINGULAR = 4

_ETA_DIVERGENCE = 30.0  # |log-odds| beyond this with moving coefficients = separation
_W_FLOOR = 1e-10


def expit_core(x: np.ndarray) -> np.ndarray:
    return _sp_expit(x)


def ols_core(x: np.ndarray, y: np.ndarray, rank_tol: float):
    """Least squares via Householder QR with column pivoting.

    Returns (coef, rss, xtx_inv, status, detail); on rank deficiency
    ``detail`` is the offending original column index.
    """
    n, p = x.shape
    q, r, perm = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag[0] == 0.0 or np.any(diag < rank_tol * diag[0]):
        bad = int(perm[int(np.argmin(diag))])
        return None, 0.0, None, OLS_RANK_DEFICIENT, bad
    qty = q.T @ y
    z = scipy.linalg.solve_triangular(r, qty, lower=False)
    coef = np.empty(p)
    coef[perm] = z
    resid = y - x @ coef
    rss = float(resid @ resid)
    r_inv = scipy.linalg.solve_triangular(r, np.eye(p), lower=False)
    m = r_inv @ r_inv.T
    xtx_inv = np.empty((p, p))
    xtx_inv[np.ix_(perm, perm)] = m
    return coef, rss, xtx_inv, OLS_OK, -1


def _bernoulli_loglik(y: np.ndarray, eta: np.ndarray) -> float:
    # y*eta - log(1 + exp(eta)), evaluated stably
    return float(np.sum(y * eta) - np.sum(np.logaddexp(0.0, eta)))


def logistic_core(x: np.ndarray, y: np.ndarray, max_iter: int, coef_tol: float, ll_tol: float):
    """IRLS for the Bernoulli-logit log-likelihood with step halving.

    Returns (coef, iterations, status).
    """
    n, p = x.shape
    beta = np.zeros(p)
    eta = np.zeros(n)
    prob = np.full(n, 0.5)
    ll = _bernoulli_loglik(y, eta)
    for it in range(1, max_iter + 1):
        w = np.clip(prob * (1.0 - prob), _W_FLOOR, None)
        grad = x.T @ (y - prob)
        hess = x.T @ (w[:, None] * x)
        try:
            c, low = scipy.linalg.cho_factor(hess, check_finite=False)
            delta = scipy.linalg.cho_solve((c, low), grad, check_finite=False)
        except scipy.linalg.LinAlgError:
            return beta, it, LOGIT_SINGULAR
        step = 1.0
        for _ in range(31):
            cand = beta + step * delta
            eta_c = x @ cand
            ll_c = _bernoulli_loglik(y, eta_c)
            if ll_c >= ll - 1e-12:
                break
            step *= 0.5
        coef_change = float(np.max(np.abs(step * delta)))
        ll_change = ll_c - ll
        beta, eta, ll = cand, eta_c, ll_c
        prob = _sp_expit(eta)
        if coef_change < coef_tol:
            return beta, it, LOGIT_CONVERGED_COEF
        if abs(ll_change) < ll_tol:
            if float(np.max(np.abs(eta))) > _ETA_DIVERGENCE:
                return beta, it, LOGIT_SEPARATION
            return beta, it, LOGIT_CONVERGED_LL
    return beta, max_iter, LOGIT_MAX_ITER
