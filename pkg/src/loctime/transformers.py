"""scikit-learn style wrappers.

Rows of ``X`` are sampled paths on a common uniform grid of ``[0, horizon]``
(shape ``(n_paths, n_steps + 1)``). ``transform`` returns one curve per row on
the same grid, so the wrappers compose with ``Pipeline`` and
``FunctionTransformer``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import oracle as _oracle
from .estimators import Epsilon, SchemeId, batch_scheme
from .exceptions import ConfigurationError
from .harness import fit_rate
from .paths import GridSpec

__all__ = ["LocalTimeTransformer", "OracleTransformer", "ConvergenceRateRegressor"]


def _paths_array(X):
    X = check_array(X, dtype=np.float64, ensure_min_features=2)
    return X


class LocalTimeTransformer(TransformerMixin, BaseEstimator):
    """Regularization scheme applied row-wise.

    Parameters
    ----------
    scheme : str
        Scheme tag, e.g. ``"J"``, ``"I3"``, ``"I41"``, ``"QV"``.
    eps : float
        Regularization width; must be a multiple of the grid step.
    level : float
        Level of the local time (ignored by ``QV``).
    horizon : float
        Time horizon of the paths.

    Attributes
    ----------
    n_steps_ : int
        Grid intervals seen during ``fit``.
    lag_ : int
        ``eps`` in grid steps.
    """

    def __init__(self, scheme="J", eps=2.0**-8, level=0.0, horizon=1.0):
        self.scheme = scheme
        self.eps = eps
        self.level = level
        self.horizon = horizon

    def fit(self, X, y=None):
        X = _paths_array(X)
        self.scheme_ = SchemeId.parse(self.scheme)
        if self.scheme_ in (SchemeId.COV, SchemeId.WEAK_PAIR):
            raise ConfigurationError(f"{self.scheme_.value} is not a single-path scheme")
        grid = GridSpec(self.horizon, X.shape[1] - 1)
        self.lag_ = Epsilon.aligned(self.eps, grid).lag_m
        self.n_steps_ = X.shape[1] - 1
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "lag_")
        X = _paths_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ConfigurationError(
                f"expected paths with {self.n_features_in_} values, got {X.shape[1]}"
            )
        if self.scheme_ is not SchemeId.QV:
            X = X - float(self.level)
        return batch_scheme(X, self.lag_, self.scheme_)


class OracleTransformer(TransformerMixin, BaseEstimator):
    """Reference local time ``t -> L_t^level`` of each row.

    ``oracle`` is ``"TANAKA"``, ``"OCCUPATION"`` or ``"DOWNCROSS"``; ``width``
    is the band width of the last two and ``normalization`` scales the
    down-crossing count.
    """

    def __init__(self, oracle="TANAKA", level=0.0, width=2.0**-6, normalization=1.0):
        self.oracle = oracle
        self.level = level
        self.width = width
        self.normalization = normalization

    def fit(self, X, y=None):
        X = _paths_array(X)
        self.oracle_ = _oracle.OracleId.parse(self.oracle)
        if not self.width > 0:
            raise ConfigurationError("width must be > 0")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "oracle_")
        X = _paths_array(X) - float(self.level)
        if self.oracle_ is _oracle.OracleId.TANAKA:
            return _oracle.batch_tanaka(X)
        if self.oracle_ is _oracle.OracleId.OCCUPATION:
            return _oracle.batch_occupation(X, float(self.width))
        return _oracle.batch_downcross(X, float(self.width), float(self.normalization))


class ConvergenceRateRegressor(RegressorMixin, BaseEstimator):
    """Power law ``error = exp(intercept) * eps**slope`` fitted by log-log OLS.

    ``fit(eps, errors)`` takes ``eps`` as a column (or 1-d array) of widths.
    ``score`` is the usual R^2 on the raw errors; ``r_squared_`` is the one
    of the log-log fit.
    """

    def fit(self, X, y):
        eps = check_array(np.asarray(X, dtype=np.float64).reshape(len(X), -1), ensure_min_samples=3)
        if eps.shape[1] != 1:
            raise ConfigurationError("ConvergenceRateRegressor takes a single eps column")
        slope, intercept, r2 = fit_rate(np.asarray(y, dtype=np.float64), eps[:, 0])
        self.slope_ = slope
        self.intercept_ = intercept
        self.r_squared_ = r2
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        eps = np.asarray(X, dtype=np.float64).reshape(len(X), -1)[:, 0]
        return np.exp(self.intercept_) * eps**self.slope_
