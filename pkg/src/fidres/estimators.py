"""scikit-learn style estimators wrapping the fiducial models.

Each estimator follows the usual contract: hyperparameters in ``__init__``,
learned state in trailing-underscore attributes set by ``fit``, and
``get_params`` / ``set_params`` inherited from ``BaseEstimator`` so the
objects can be cloned and grid-searched.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from . import corrfid, gamma_scale, linpred, scaled_uniform
from .decision import LossSpec, minimize_fiducial_risk
from .exceptions import DomainError
from .stochastics import as_generator


def _one_dimensional(X, name="X"):
    arr = check_array(X, ensure_2d=False, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise DomainError(f"{name} must be one-dimensional or a single column")
        arr = arr[:, 0]
    return arr


class _FiducialMixin:
    """Delegates distribution queries to the fitted ``fiducial_``."""

    def pdf(self, value):
        check_is_fitted(self, "fiducial_")
        return self.fiducial_.pdf(value)

    def cdf(self, value):
        check_is_fitted(self, "fiducial_")
        return self.fiducial_.cdf(value)

    def ppf(self, q):
        check_is_fitted(self, "fiducial_")
        return self.fiducial_.ppf(q)

    def interval(self, level=0.95):
        """Equal-tailed fiducial interval."""
        lo, hi = self.ppf(np.array([(1 - level) / 2, (1 + level) / 2]))
        return float(lo), float(hi)

    def sample(self, count, random_state=None):
        check_is_fitted(self, "fiducial_")
        return self.fiducial_.sample(count, as_generator(random_state))


class CorrelationFiducialEstimator(_FiducialMixin, BaseEstimator):
    """Fiducial inference for the correlation of a bivariate sample.

    Parameters
    ----------
    loss : {"absolute", "squared"}
        Loss defining ``estimate_``: the fiducial median or mean.

    Attributes
    ----------
    r_ : float
        Empirical correlation.
    nu_ : float
        Degrees of freedom ``n - 1``.
    fiducial_ : CorrelationFiducial
    estimate_ : float
    """

    def __init__(self, loss="absolute"):
        self.loss = loss

    def fit(self, X, y=None):
        if y is not None:
            X = np.column_stack([_one_dimensional(X), _one_dimensional(y, "y")])
        X = check_array(X, dtype=float)
        sample = corrfid.Sample2D(X)
        self.n_features_in_ = 2
        self.n_samples_ = sample.n
        self.fiducial_ = corrfid.CorrelationFiducial.from_sample(sample)
        self.r_ = self.fiducial_.r
        self.nu_ = self.fiducial_.nu
        if self.loss == "absolute":
            self.estimate_ = self.fiducial_.median()
        elif self.loss == "squared":
            self.estimate_ = self.fiducial_.mean()
        else:
            raise DomainError(f"unsupported loss {self.loss!r} for the correlation fiducial")
        return self


class GammaScaleFiducial(_FiducialMixin, BaseEstimator):
    """Fiducial inference for the mean of gamma data with known shape.

    Parameters
    ----------
    alpha : float
        Known shape of each observation.
    loss : str
        One of ``squared``, ``scale_invariant_sq``, ``log_sq``, ``absolute``.
    """

    def __init__(self, alpha=1.0, loss="log_sq"):
        self.alpha = alpha
        self.loss = loss

    def fit(self, X, y=None):
        obs = _one_dimensional(X)
        self.fiducial_ = gamma_scale.GammaScaleModel.from_samples(obs, self.alpha)
        self.n_features_in_ = 1
        self.mean_ = self.fiducial_.y
        self.estimate_ = float(minimize_fiducial_risk(self.fiducial_, LossSpec(self.loss)))
        return self


class ScaledUniformFiducial(_FiducialMixin, BaseEstimator):
    """Fiducial inference for theta in the scaled uniform model with known spread ``k``."""

    def __init__(self, k=0.5, loss="scale_invariant_sq"):
        self.k = k
        self.loss = loss

    def fit(self, X, y=None):
        obs = _one_dimensional(X)
        self.data_ = scaled_uniform.ScaledUniformData.from_observations(obs, self.k)
        self.fiducial_ = scaled_uniform.fiducial(self.data_)
        self.n_features_in_ = 1
        self.theta_ml_ = self.data_.theta_ml
        self.theta_mu_ = self.data_.theta_mu
        if self.loss == "scale_invariant_sq":
            self.estimate_ = scaled_uniform.estimate_invariant_sq(self.data_)
        elif self.loss == "log_sq":
            self.estimate_ = scaled_uniform.estimate_log_sq(self.data_)
        else:
            self.estimate_ = float(minimize_fiducial_risk(self.fiducial_, LossSpec(self.loss)))
        return self


class FiducialLinearRegression(RegressorMixin, BaseEstimator):
    """Least-squares fit read as the fiducial-optimal estimate of X beta.

    Rank-deficient designs are accepted: ``coef_`` (with ``intercept_``) is
    the minimum-norm solution, while fitted values and predictions for rows in the row space
    of X do not depend on that choice.
    """

    def __init__(self, fit_intercept=False):
        self.fit_intercept = fit_intercept

    def _design(self, X):
        if self.fit_intercept:
            X = np.column_stack([np.ones(X.shape[0]), X])
        return X

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=float, y_numeric=True)
        self.model_ = linpred.LinearModel(self._design(X), y)
        self.rank_ = self.model_.rank
        self.projector_ = self.model_.projector.matrix
        self.fitted_ = self.model_.fit
        coef = self.model_.coefficients()
        self.intercept_ = float(coef[0]) if self.fit_intercept else 0.0
        self.coef_ = coef[1:] if self.fit_intercept else coef
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = validate_data(self, X, dtype=float, reset=False)
        return linpred.predict(self._design(X), self.model_)

    def estimate(self, operator):
        """Optimal estimate A p y of gamma = A X beta."""
        check_is_fitted(self, "model_")
        return linpred.optimal_estimate(operator, self.model_)

    def sample_theta(self, count, random_state=None):
        check_is_fitted(self, "model_")
        return linpred.fiducial_theta_sample(self.model_, as_generator(random_state), count)
