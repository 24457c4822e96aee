"""Model families: the glue between model modules and the generic risk code.

A family knows how to generate batches of data for a parameter value, build
the fiducial for one observed datum, evaluate named estimators on a batch,
and apply its group action to data, parameters and actions.

Batches carry one dataset per leading-axis entry: a scalar mean for the gamma
scale model, a ``(max, min)`` row for the scaled uniform model, an empirical
correlation for the binormal model and an observation vector for the linear
model.
"""

import math

import numpy as np
from scipy import special

from . import corrfid, gamma_scale, linpred, scaled_uniform
from .decision import FiducialSampler
from .exceptions import DomainError, UnsupportedModelError
from .stochastics import as_generator


class _Family:
    name = "family"
    estimators = {}

    def parameter(self, theta):
        return theta

    def estimator(self, which):
        if callable(which):
            return which
        try:
            return self.estimators[which].__get__(self)
        except KeyError:
            raise DomainError(
                f"unknown estimator {which!r} for {self.name}; "
                f"choose from {', '.join(self.estimators)}") from None

    def optimal_estimator(self, kind):
        try:
            return self.optimal[kind]
        except KeyError:
            raise UnsupportedModelError(
                f"no shipped optimal estimator for {kind} loss in {self.name}") from None

    def default_thetas(self):
        return (0.5, 1.0, 5.0)

    def default_data_values(self):
        return (0.5, 1.0, 5.0)

    def fiducial_cdf_at(self, batch, theta):
        raise UnsupportedModelError(f"{self.name} does not provide a scalar fiducial CDF")

    def group_elements(self):
        raise UnsupportedModelError(f"{self.name} has no transitive group action")

    def loss_test_pairs(self):
        raise UnsupportedModelError(f"{self.name} has no transitive group action")


class _ScaleGroup:
    """Multiplicative group acting on data, parameters and actions alike."""

    def group_elements(self):
        return (2.0, 0.5, 10.0)

    def act_data(self, g, batch):
        return g * np.asarray(batch)

    def act_param(self, g, gamma):
        return g * gamma

    def act_action(self, g, x):
        return g * np.asarray(x)

    def loss_test_pairs(self):
        return ((3.0, 1.0), (1.0, 2.5))


class GammaScaleFamily(_ScaleGroup, _Family):
    name = "gamma-scale"

    def __init__(self, n, alpha):
        self.n = int(n)
        self.alpha = float(alpha)
        gamma_scale.GammaScaleModel(self.n, self.alpha, 1.0)  # validates n, alpha
        self.shape = self.n * self.alpha

    def generate(self, theta, rng, size):
        return gamma_scale.generate_data(theta, self.n, self.alpha, rng, size)

    def fiducial(self, datum):
        return gamma_scale.GammaScaleModel(self.n, self.alpha, float(np.ravel(datum)[0]))

    def data_at(self, value):
        return np.array([float(value)])

    def reference_batch(self):
        return np.array([1.0, 2.5])

    def fiducial_cdf_at(self, batch, theta):
        return special.gammaincc(self.shape, self.shape * np.asarray(batch) / theta)

    def _geometric(self, batch):
        return gamma_scale.geometric_factor(self.shape) * np.asarray(batch)

    def _mean(self, batch):
        return gamma_scale.mean_factor(self.shape) * np.asarray(batch)

    def _invariant_sq(self, batch):
        return gamma_scale.invariant_sq_factor(self.shape) * np.asarray(batch)

    def _median(self, batch):
        return self.shape / special.gammainccinv(self.shape, 0.5) * np.asarray(batch)

    def _mle(self, batch):
        return np.asarray(batch, dtype=float)

    estimators = {"geometric": _geometric, "mean": _mean, "invariant_sq": _invariant_sq,
                  "median": _median, "mle": _mle}
    optimal = {"log_sq": "geometric", "scale_invariant_sq": "invariant_sq",
               "squared": "mean", "absolute": "median"}


class ScaledUniformFamily(_ScaleGroup, _Family):
    """Scaled uniform model; with ``ancillary`` set, data are drawn conditionally on it.

    The equivariant-risk identity holds in the conditional model: the
    frequentist risk given u_min / u_max = a equals the fiducial risk at any
    dataset with that observed ratio.
    """

    name = "scaled-uniform"

    def __init__(self, n, k, ancillary=None):
        self.n = int(n)
        self.k = float(k)
        scaled_uniform._check_params(1.0, self.n, self.k)
        if ancillary is not None:
            ancillary = float(ancillary)
            if not (1 - self.k) / (1 + self.k) <= ancillary <= 1:
                raise DomainError(f"ancillary must lie in [(1-k)/(1+k), 1], got {ancillary}")
        self.ancillary = ancillary

    @staticmethod
    def default_ancillary(k):
        return math.sqrt((1 - k) / (1 + k))

    def generate(self, theta, rng, size):
        if self.ancillary is None:
            return scaled_uniform.generate_batch(theta, self.n, self.k, rng, size)
        return scaled_uniform.generate_conditional_batch(theta, self.n, self.k, self.ancillary,
                                                         rng, size)

    def _ratio(self):
        return self.default_ancillary(self.k) if self.ancillary is None else self.ancillary

    def data_at(self, value):
        return np.array([[float(value), float(value) * self._ratio()]])

    def reference_batch(self):
        a = self._ratio()
        return np.array([[1.0, a], [2.5, 2.5 * a], [1.0, 1.0]])

    def fiducial(self, datum):
        y1, y2 = np.ravel(datum)[:2]
        return scaled_uniform.fiducial(
            scaled_uniform.ScaledUniformData(self.n, self.k, float(y1), float(y2)))

    def fiducial_cdf_at(self, batch, theta):
        batch = np.asarray(batch)
        lower = batch[:, 0] / (1 + self.k)
        upper = np.maximum(batch[:, 1] / (1 - self.k), lower)
        t = np.clip(theta, lower, upper)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.expm1(-self.n * np.log(t / lower)) / np.expm1(-self.n * np.log(upper / lower))
        return np.where(upper > lower, out, (theta >= lower).astype(float))

    def _cols(self, batch):
        batch = np.atleast_2d(np.asarray(batch, dtype=float))
        return batch[:, 0], batch[:, 1]

    def _invariant_sq(self, batch):
        return scaled_uniform.invariant_sq_action(self.n, self.k, *self._cols(batch))

    def _log_sq(self, batch):
        return scaled_uniform.log_sq_action(self.n, self.k, *self._cols(batch))

    def _theta_ml(self, batch):
        y1, _ = self._cols(batch)
        return y1 / (1 + self.k)

    def _median(self, batch):
        y1, y2 = self._cols(batch)
        lower = y1 / (1 + self.k)
        upper = np.maximum(y2 / (1 - self.k), lower)
        mass = -np.expm1(-self.n * np.log(upper / lower))
        return lower * np.exp(-np.log1p(-0.5 * mass) / self.n)

    estimators = {"invariant_sq": _invariant_sq, "log_sq": _log_sq, "theta_ml": _theta_ml,
                  "median": _median}
    optimal = {"scale_invariant_sq": "invariant_sq", "log_sq": "log_sq", "absolute": "median"}


class CorrelationFamily(_Family):
    """Binormal data summarized by the empirical correlation of ``n`` points.

    ``nu_offset`` shifts the degrees of freedom of the fiducial away from
    n - 1; it exists to build deliberately miscalibrated negative controls.
    """

    name = "correlation"

    def __init__(self, n, nu_offset=0):
        self.n = int(n)
        if self.n < 3:
            raise DomainError("n must be at least 3")
        self.nu = self.n - 1 + nu_offset

    def generate(self, theta, rng, size):
        params = corrfid.BinormalParams(rho=float(theta))
        x, y = corrfid.binormal_batch(params, self.n, int(size), rng)
        return np.clip(corrfid.empirical_correlation_batch(x, y), -1.0, 1.0)

    def fiducial(self, datum):
        return corrfid.CorrelationFiducial(float(np.ravel(datum)[0]), self.nu)

    def data_at(self, value):
        return np.array([float(value)])

    def default_thetas(self):
        return (-0.5, 0.0, 0.5)

    def default_data_values(self):
        return (-0.5, 0.0, 0.5)

    def fiducial_cdf_at(self, batch, theta):
        out = np.empty(len(batch))
        for i, r in enumerate(np.asarray(batch, dtype=float)):
            out[i] = corrfid.CorrelationFiducial(r, self.nu).cdf(theta) if abs(r) < 1 else np.nan
        return out

    def _median(self, batch):
        return np.array([corrfid.CorrelationFiducial(r, self.nu).median() if abs(r) < 1 else np.nan
                         for r in np.asarray(batch, dtype=float)])

    def _r(self, batch):
        return np.asarray(batch, dtype=float)

    estimators = {"median": _median, "r": _r}
    optimal = {"absolute": "median"}


class LinearFamily(_Family):
    """Linear model y = X beta + u with focus parameter gamma = A X beta.

    Scalar parameter values t are read as beta = t * ones(p).
    """

    name = "linear"

    def __init__(self, design, operator=None, seed=12345):
        self.design = np.atleast_2d(np.asarray(design, dtype=float))
        m, p = self.design.shape
        self.projector = linpred.projection(self.design).matrix
        op = np.eye(m) if operator is None else np.atleast_2d(np.asarray(operator, dtype=float))
        if op.shape[1] != m:
            raise DomainError(f"operator must have {m} columns")
        self.operator = op
        fixed = np.random.default_rng(seed)
        self._shifts = [fixed.standard_normal(p) for _ in range(3)]
        self._offset = fixed.standard_normal(m)

    def _beta(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.full(self.design.shape[1], float(theta)) if theta.ndim == 0 else theta

    def parameter(self, theta):
        return self.operator @ (self.design @ self._beta(theta))

    def generate(self, theta, rng, size):
        mean = self.design @ self._beta(theta)
        return mean + as_generator(rng).standard_normal((int(size), mean.size))

    def data_at(self, value):
        return (self.design @ self._beta(value) + self._offset)[None, :]

    def reference_batch(self):
        return np.vstack([self._offset, 2.0 * self._offset + 1.0])

    def fiducial(self, datum):
        model = linpred.LinearModel(self.design, np.ravel(datum))
        op = self.operator
        return FiducialSampler(lambda count, gen: linpred.fiducial_theta_sample(model, gen, count)
                               @ op.T, mean=lambda: op @ model.fit)

    def group_elements(self):
        return tuple(self._shifts)

    def act_data(self, g, batch):
        return np.asarray(batch) + self.design @ g

    def act_param(self, g, gamma):
        return gamma + self.operator @ (self.design @ g)

    def act_action(self, g, x):
        return np.asarray(x) + self.operator @ (self.design @ g)

    def loss_test_pairs(self):
        q = self.operator.shape[0]
        return ((np.zeros(q), np.ones(q)), (np.arange(q, dtype=float), -np.ones(q)))

    def default_thetas(self):
        return (-1.0, 0.0, 2.0)

    def default_data_values(self):
        return (-1.0, 0.0, 2.0)

    def _optimal(self, batch):
        return np.atleast_2d(batch) @ (self.operator @ self.projector).T

    def _shrunk(self, batch):
        return 0.9 * self._optimal(batch)

    estimators = {"optimal": _optimal, "shrunk": _shrunk}
    optimal = {"squared_norm": "optimal"}
