"""Power-law fitting on log-log data, scikit-learn style."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array


class PowerLawFit(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``y ~ A x^d`` on a log-log scale.

    After ``fit`` the estimator exposes ``exponent_``, ``prefactor_``, the
    root-mean-square log residual ``residual_``, and the realised envelope
    constants ``c_``, ``C_`` with ``c_ x^d <= y <= C_ x^d`` on the data.
    """

    def __init__(self, min_points: int = 2, fixed_exponent=None):
        self.min_points = min_points
        self.fixed_exponent = fixed_exponent

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(-1, 1), y, y_numeric=True)
        x = X[:, 0]
        if len(x) < self.min_points:
            raise ValueError(f"need at least {self.min_points} points, got {len(x)}")
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("power-law fit needs positive data")
        if len(np.unique(x)) < 2 and self.fixed_exponent is None:
            raise ValueError("degenerate grid: all scales equal")
        lx, ly = np.log(x), np.log(y)
        if self.fixed_exponent is None:
            slope, icpt = np.polyfit(lx, ly, 1)
        else:
            slope = float(self.fixed_exponent)
            icpt = float(np.mean(ly - slope * lx))
        resid = ly - (slope * lx + icpt)
        self.exponent_ = float(slope)
        self.prefactor_ = float(np.exp(icpt))
        self.residual_ = float(np.sqrt(np.mean(resid**2)))
        ratio = y / x**slope
        self.c_ = float(ratio.min())
        self.C_ = float(ratio.max())
        self.n_points_ = len(x)
        return self

    def predict(self, X):
        check_is_fitted(self, "exponent_")
        x = check_array(np.asarray(X, dtype=float).reshape(-1, 1))[:, 0]
        return self.prefactor_ * x**self.exponent_

    def score(self, X, y, sample_weight=None):
        """R^2 in log space."""
        check_is_fitted(self, "exponent_")
        ly = np.log(np.asarray(y, dtype=float))
        pred = np.log(self.predict(X))
        ss_res = np.sum((ly - pred) ** 2)
        ss_tot = np.sum((ly - ly.mean()) ** 2)
        return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def fit_exponent(x, y, **kw) -> PowerLawFit:
    return PowerLawFit(**kw).fit(x, y)
