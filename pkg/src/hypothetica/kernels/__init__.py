"""Regression kernels: OLS (pivoted QR) and IRLS logistic regression.

Every estimator in the package fits its nuisance models through the two
entry points here, so this is where the numerical heavy lifting happens.
Two interchangeable backends provide the inner loops:

* ``hypothetica.kernels._compiled`` — a Cython extension, used when it was
  built at install time;
* ``hypothetica.kernels._pure`` — a numpy/scipy fallback with identical
  algorithms and status codes.

Selection happens once at import.  Set ``HYPOTHETICA_PURE_PYTHON=1`` to
force the fallback (useful for benchmarking; see ``benchmarks/``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateResponseError, SingularDesignError
from . import _pure

_FORCE_PURE = os.environ.get("HYPOTHETICA_PURE_PYTHON", "") not in ("", "0")
if _FORCE_PURE:
    _impl = _pure
else:
    try:
        from . import _compiled as _impl
    except ImportError:
        _impl = _pure

__all__ = [
    "FittedLinearModel",
    "FittedLogisticModel",
    "ols_fit",
    "ols_predict",
    "logistic_fit",
    "logistic_predict",
    "expit",
    "logit",
    "backend_name",
]

RANK_TOL = 1e-10
LOGIT_MAX_ITER = 100
LOGIT_COEF_TOL = 1e-8
LOGIT_LL_TOL = 1e-10


def backend_name() -> str:
    """Name of the kernel backend in use ("compiled" or "numpy")."""
    return _impl.BACKEND_NAME


@dataclass(frozen=True)
class FittedLinearModel:
    """OLS fit: intercept-first coefficients plus RSS/(n-p) residual variance.

    ``xtx_inv`` is kept for posterior parameter draws (multiple imputation).
    """

    coefficients: np.ndarray
    residual_variance: float
    design_column_names: tuple
    xtx_inv: np.ndarray
    n_obs: int

    def __post_init__(self):
        self.coefficients.setflags(write=False)
        self.xtx_inv.setflags(write=False)


@dataclass(frozen=True)
class FittedLogisticModel:
    """Logistic fit with an explicit convergence flag; never trust
    ``coefficients`` without checking ``converged``."""

    coefficients: np.ndarray
    converged: bool
    iterations: int
    diagnostic: str | None = None

    def __post_init__(self):
        self.coefficients.setflags(write=False)


def _check_design(design, response):
    x = np.ascontiguousarray(design, dtype=float)
    y = np.ascontiguousarray(response, dtype=float)
    if x.ndim != 2:
        raise ValueError("design must be a 2-D matrix")
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise ValueError("response length must match design rows")
    return x, y


def ols_fit(design, response, column_names=None) -> FittedLinearModel:
    """Least squares for a design whose first column is the intercept.

    Raises :class:`SingularDesignError` when n <= p or when the smallest
    QR pivot falls below ``RANK_TOL`` times the largest.
    """
    x, y = _check_design(design, response)
    n, p = x.shape
    names = tuple(column_names) if column_names is not None else ("intercept",) + tuple(
        f"x{j}" for j in range(1, p)
    )
    if len(names) != p:
        raise ValueError("column_names length must match design columns")
    if n <= p:
        raise SingularDesignError(f"need n > p to fit: n={n}, p={p} ({', '.join(names)})")
    coef, rss, xtx_inv, status, detail = _impl.ols_core(x, y, RANK_TOL)
    if status == _pure.OLS_RANK_DEFICIENT:
        raise SingularDesignError(
            f"design is rank deficient (pivot ratio below {RANK_TOL:g}); "
            f"offending column: {names[detail]}"
        )
    return FittedLinearModel(
        coefficients=coef,
        residual_variance=rss / (n - p),
        design_column_names=names,
        xtx_inv=xtx_inv,
        n_obs=n,
    )


def ols_predict(model: FittedLinearModel, covariates) -> float | np.ndarray:
    """Intercept plus dot product; accepts one covariate row or a matrix.

    Covariates exclude the intercept column.
    """
    x = np.asarray(covariates, dtype=float)
    coef = model.coefficients
    if x.ndim == 1:
        if x.shape[0] != coef.shape[0] - 1:
            raise ValueError(f"expected {coef.shape[0] - 1} covariates, got {x.shape[0]}")
        return float(coef[0] + x @ coef[1:])
    if x.ndim == 2:
        if x.shape[1] != coef.shape[0] - 1:
            raise ValueError(f"expected {coef.shape[0] - 1} covariate columns, got {x.shape[1]}")
        return coef[0] + x @ coef[1:]
    raise ValueError("covariates must be a row or a matrix")


def logistic_fit(design, response, column_names=None) -> FittedLogisticModel:
    """IRLS logistic regression of a 0/1 response on a design with intercept.

    Non-convergence (including suspected separation) is returned as a
    flagged result, not raised; a one-class response raises
    :class:`DegenerateResponseError`.
    """
    x, y = _check_design(design, response)
    n, p = x.shape
    uniq = np.unique(y)
    if not np.isin(uniq, (0.0, 1.0)).all():
        raise DegenerateResponseError("logistic response must be coded 0/1")
    if uniq.shape[0] < 2:
        raise DegenerateResponseError(f"response is constant ({uniq[0]:g}); cannot fit a logistic model")
    if n <= p:
        raise SingularDesignError(f"need n > p to fit: n={n}, p={p}")
    coef, iterations, status = _impl.logistic_core(x, y, LOGIT_MAX_ITER, LOGIT_COEF_TOL, LOGIT_LL_TOL)
    if status == _pure.LOGIT_SINGULAR:
        raise SingularDesignError("weighted normal matrix is singular in IRLS")
    if status in (_pure.LOGIT_CONVERGED_COEF, _pure.LOGIT_CONVERGED_LL):
        return FittedLogisticModel(coefficients=coef, converged=True, iterations=iterations)
    if status == _pure.LOGIT_SEPARATION:
        diag = (
            f"separation suspected after {iterations} iterations: fitted log-odds exceed "
            "+/-30 while coefficients keep growing"
        )
    else:
        diag = f"no convergence within {iterations} iterations"
    return FittedLogisticModel(coefficients=coef, converged=False, iterations=iterations, diagnostic=diag)


def logistic_predict(model: FittedLogisticModel, covariates) -> float | np.ndarray:
    """P(response = 1) at the given covariate row(s) (intercept excluded)."""
    x = np.asarray(covariates, dtype=float)
    coef = model.coefficients
    if x.ndim == 1:
        return float(expit(coef[0] + x @ coef[1:]))
    return expit(coef[0] + x @ coef[1:])


def expit(x):
    """1 / (1 + e^(-x)), numerically stable over the full double range."""
    arr = np.asarray(x, dtype=float)
    out = _impl.expit_core(arr.ravel()).reshape(arr.shape)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def logit(p):
    """Inverse of :func:`expit`."""
    arr = np.asarray(p, dtype=float)
    out = np.log(arr / (1.0 - arr))
    if np.isscalar(p) or arr.ndim == 0:
        return float(out)
    return out
