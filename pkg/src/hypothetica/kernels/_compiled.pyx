# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled regression kernels.

Same algorithms and status codes as ``_pure``; tight C loops instead of
vectorised numpy calls. This is the hot path of the simulation studies,
which run hundreds of thousands of small fits.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log1p, sqrt

BACKEND_NAME = "compiled"

OLS_OK = 0
OLS_RANK_DEFICIENT = 1

LOGIT_CONVERGED_COEF = 0
LOGIT_CONVERGED_LL = 1
LOGIT_MAX_ITER = 2
LOGIT_SEPARATION = 3
LOGIT_SINGULAR = 4

cdef double _ETA_DIVERGENCE = 30.0
cdef double _W_FLOOR = 1e-10


cdef inline double _expit(double v) nogil:
    cdef double e
    if v >= 0.0:
        return 1.0 / (1.0 + exp(-v))
    e = exp(v)
    return e / (1.0 + e)


cdef inline double _softplus(double v) nogil:
    # log(1 + exp(v)) without overflow
    if v > 0.0:
        return v + log1p(exp(-v))
    return log1p(exp(v))


def expit_core(x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(xa)
    cdef Py_ssize_t i, n = xa.shape[0]
    for i in range(n):
        out[i] = _expit(xa[i])
    return out.reshape(np.shape(x))


def ols_core(x, y, double rank_tol):
    """Least squares via Householder QR with column pivoting.

    Returns (coef, rss, xtx_inv, status, detail).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.array(x, dtype=np.float64, order="C", copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.array(y, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = a.shape[0], p = a.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] perm = np.arange(p, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rdiag = np.zeros(p, dtype=np.float64)
    cdef Py_ssize_t i, j, k, best, t
    cdef double s, bestnorm, alpha, vnorm2, tau, dot, tmp

    for k in range(p):
        # pivot on the largest remaining column norm (recomputed exactly)
        best = k
        bestnorm = -1.0
        for j in range(k, p):
            s = 0.0
            for i in range(k, n):
                s += a[i, j] * a[i, j]
            if s > bestnorm:
                bestnorm = s
                best = j
        if best != k:
            for i in range(n):
                tmp = a[i, k]
                a[i, k] = a[i, best]
                a[i, best] = tmp
            t = perm[k]
            perm[k] = perm[best]
            perm[best] = t
        if bestnorm <= 0.0:
            rdiag[k] = 0.0
            continue
        alpha = -sqrt(bestnorm) if a[k, k] >= 0.0 else sqrt(bestnorm)
        rdiag[k] = alpha
        # Householder vector v = column - alpha*e1, stored in place
        a[k, k] -= alpha
        vnorm2 = 0.0
        for i in range(k, n):
            vnorm2 += a[i, k] * a[i, k]
        if vnorm2 <= 0.0:
            continue
        tau = 2.0 / vnorm2
        for j in range(k + 1, p):
            dot = 0.0
            for i in range(k, n):
                dot += a[i, k] * a[i, j]
            dot *= tau
            for i in range(k, n):
                a[i, j] -= dot * a[i, k]
        dot = 0.0
        for i in range(k, n):
            dot += a[i, k] * b[i]
        dot *= tau
        for i in range(k, n):
            b[i] -= dot * a[i, k]

    cdef double dmax = 0.0, dmin
    for k in range(p):
        if fabs(rdiag[k]) > dmax:
            dmax = fabs(rdiag[k])
    cdef Py_ssize_t argmin = 0
    dmin = fabs(rdiag[0])
    for k in range(1, p):
        if fabs(rdiag[k]) < dmin:
            dmin = fabs(rdiag[k])
            argmin = k
    if dmax == 0.0 or dmin < rank_tol * fabs(rdiag[0]):
        return None, 0.0, None, OLS_RANK_DEFICIENT, int(perm[argmin])

    # back-substitution: R z = b[:p]; off-diagonal R is in a's upper triangle
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z = np.empty(p, dtype=np.float64)
    for k in range(p - 1, -1, -1):
        s = b[k]
        for j in range(k + 1, p):
            s -= a[k, j] * z[j]
        z[k] = s / rdiag[k]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] coef = np.empty(p, dtype=np.float64)
    for k in range(p):
        coef[perm[k]] = z[k]

    cdef double rss = 0.0
    for i in range(p, n):
        rss += b[i] * b[i]

    # R^{-1} by columns, then (X'X)^{-1} = P R^{-1} R^{-T} P'
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rinv = np.zeros((p, p), dtype=np.float64)
    for j in range(p):
        for k in range(j, -1, -1):
            s = 1.0 if k == j else 0.0
            for t in range(k + 1, j + 1):
                s -= a[k, t] * rinv[t, j]
            rinv[k, j] = s / rdiag[k]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xtx_inv = np.empty((p, p), dtype=np.float64)
    for i in range(p):
        for j in range(p):
            s = 0.0
            for t in range(j if j > i else i, p):
                s += rinv[i, t] * rinv[j, t]
            xtx_inv[perm[i], perm[j]] = s
    return coef, rss, xtx_inv, OLS_OK, -1


cdef int _cholesky(double[:, ::1] h, double[:, ::1] lo, Py_ssize_t p) nogil:
    cdef Py_ssize_t i, j, t
    cdef double s
    for j in range(p):
        s = h[j, j]
        for t in range(j):
            s -= lo[j, t] * lo[j, t]
        if s <= 0.0:
            return 1
        lo[j, j] = sqrt(s)
        for i in range(j + 1, p):
            s = h[i, j]
            for t in range(j):
                s -= lo[i, t] * lo[j, t]
            lo[i, j] = s / lo[j, j]
    return 0


def logistic_core(x, y, int max_iter, double coef_tol, double ll_tol):
    """IRLS for the Bernoulli-logit log-likelihood with step halving.

    Returns (coef, iterations, status).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xa.shape[0], p = xa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] beta = np.zeros(p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cand = np.zeros(p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] eta = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prob = np.full(n, 0.5, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad = np.zeros(p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] hess = np.zeros((p, p), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lo = np.zeros((p, p), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] delta = np.zeros(p, dtype=np.float64)
    cdef Py_ssize_t i, j, t, it, halve
    cdef double ll, ll_c, s, w, step, coef_change, ll_change, emax

    ll = 0.0
    for i in range(n):
        ll += ya[i] * eta[i] - _softplus(eta[i])

    for it in range(1, max_iter + 1):
        for j in range(p):
            grad[j] = 0.0
            for t in range(p):
                hess[j, t] = 0.0
        for i in range(n):
            w = prob[i] * (1.0 - prob[i])
            if w < _W_FLOOR:
                w = _W_FLOOR
            s = ya[i] - prob[i]
            for j in range(p):
                grad[j] += xa[i, j] * s
                for t in range(j, p):
                    hess[j, t] += w * xa[i, j] * xa[i, t]
        for j in range(p):
            for t in range(j):
                hess[j, t] = hess[t, j]
        if _cholesky(hess, lo, p):
            return beta, it, LOGIT_SINGULAR
        # solve L L' delta = grad
        for j in range(p):
            s = grad[j]
            for t in range(j):
                s -= lo[j, t] * delta[t]
            delta[j] = s / lo[j, j]
        for j in range(p - 1, -1, -1):
            s = delta[j]
            for t in range(j + 1, p):
                s -= lo[t, j] * delta[t]
            delta[j] = s / lo[j, j]

        step = 1.0
        for halve in range(31):
            for j in range(p):
                cand[j] = beta[j] + step * delta[j]
            ll_c = 0.0
            for i in range(n):
                s = 0.0
                for j in range(p):
                    s += xa[i, j] * cand[j]
                eta[i] = s
                ll_c += ya[i] * s - _softplus(s)
            if ll_c >= ll - 1e-12:
                break
            step *= 0.5

        coef_change = 0.0
        for j in range(p):
            s = fabs(step * delta[j])
            if s > coef_change:
                coef_change = s
            beta[j] = cand[j]
        ll_change = ll_c - ll
        ll = ll_c
        emax = 0.0
        for i in range(n):
            prob[i] = _expit(eta[i])
            if fabs(eta[i]) > emax:
                emax = fabs(eta[i])
        if coef_change < coef_tol:
            return beta, it, LOGIT_CONVERGED_COEF
        if fabs(ll_change) < ll_tol:
            if emax > _ETA_DIVERGENCE:
                return beta, it, LOGIT_SEPARATION
            return beta, it, LOGIT_CONVERGED_LL
    return beta, max_iter, LOGIT_MAX_ITER
