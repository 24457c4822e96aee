"""Gamma scale model y = theta * u with u ~ Gamma(n*alpha, scale 1/(n*alpha)).

Here ``y`` is the empirical mean of ``n`` gamma observations with known shape
``alpha``, and ``theta`` is their expectation. The fiducial theta = y / u is an
inverse-gamma law with shape n*alpha and scale y*n*alpha.

Optimal actions under the three losses used here:

* squared error: the fiducial mean ``n*alpha / (n*alpha - 1) * y``;
* scale-invariant squared error ``(theta - x)**2 / theta**2``: the ratio
  E(1/theta) / E(1/theta**2) ``= n*alpha / (n*alpha + 1) * y``;
* squared log error: ``exp(E ln theta) = y * exp(ln(n*alpha) - psi(n*alpha))``.

The last expression carries no extra ``1/alpha`` factor: with ``y`` the sample
mean, E ln(y / u) = ln y + ln(n*alpha) - psi(n*alpha). A ``y/alpha`` prefactor
belongs to the parametrization in which theta is the per-observation gamma
scale, whose estimator is the sample mean divided by alpha.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import DomainError, UndefinedActionError
from .specfun import digamma
from .stochastics import as_generator, sample_gamma


@dataclass(frozen=True)
class GammaScaleModel:
    n: int
    alpha: float
    y: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.y > 0 or not math.isfinite(self.y):
            raise DomainError(f"the observed mean y must be positive, got {self.y}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "y", float(self.y))

    @classmethod
    def from_samples(cls, samples, alpha):
        samples = np.asarray(samples, dtype=float).ravel()
        if samples.size == 0 or np.any(samples <= 0):
            raise DomainError("gamma observations must be positive")
        return cls(samples.size, alpha, float(samples.mean()))

    @property
    def shape(self):
        """Total shape n * alpha of the pivot u."""
        return self.n * self.alpha

    def with_y(self, y):
        return GammaScaleModel(self.n, self.alpha, y)

    # fiducial law of theta
    def pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta <= 0):
            raise DomainError("theta must be positive")
        s = self.shape
        beta = s * self.y
        log_pdf = s * math.log(beta) - special.gammaln(s) - (s + 1.0) * np.log(theta) - beta / theta
        return np.exp(log_pdf)[()]

    def cdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        with np.errstate(divide="ignore"):
            out = special.gammaincc(self.shape, self.shape * self.y / np.maximum(theta, 0.0))
        return np.where(theta > 0, out, 0.0)[()]

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q >= 1)):
            raise DomainError("probabilities must lie strictly inside (0, 1)")
        return (self.shape * self.y / special.gammainccinv(self.shape, q))[()]

    def median(self):
        return float(self.ppf(0.5))

    def mean(self):
        return estimate_mean(self)

    def expect_log(self):
        return math.log(self.y) + math.log(self.shape) - digamma(self.shape)

    def expect_inverse(self, k):
        """E theta**(-k) = E u**k / y**k for the fiducial theta = y / u."""
        s = self.shape
        if s + k <= 0:
            raise UndefinedActionError(f"E theta^-{k} is infinite for shape {s}")
        return math.exp(special.gammaln(s + k) - special.gammaln(s) - k * math.log(s)) / self.y**k

    def sample(self, count, rng=None):
        return fiducial_sample(self, rng, count)


def scale_from_pivot(y, u):
    """Parameter generating equation theta = y / u."""
    return np.asarray(y) / np.asarray(u)


def fiducial_sample(model, rng, count):
    count = int(count)
    if count < 1:
        raise DomainError("count must be at least 1")
    u = sample_gamma(model.shape, 1.0 / model.shape, as_generator(rng), count)
    return scale_from_pivot(model.y, u)


def mean_factor(shape):
    if not shape > 1:
        raise UndefinedActionError(f"the fiducial mean requires n*alpha > 1, got {shape}")
    return shape / (shape - 1.0)


def geometric_factor(shape):
    return math.exp(math.log(shape) - digamma(shape))


def invariant_sq_factor(shape):
    return shape / (shape + 1.0)


def estimate_mean(model):
    """Fiducial mean, optimal under squared error; requires n*alpha > 1."""
    return mean_factor(model.shape) * model.y


def estimate_geometric(model):
    """exp(E ln theta): optimal under squared log error."""
    return geometric_factor(model.shape) * model.y


def estimate_invariant_sq(model):
    """E(1/theta) / E(1/theta^2): optimal under (theta - x)^2 / theta^2."""
    return invariant_sq_factor(model.shape) * model.y


def bayes_posterior_density(theta, model):
    """Posterior of theta under the right Haar prior 1/theta.

    Evaluated as prior times likelihood over the evidence. The likelihood of
    the mean is f_u(y / theta) / theta and the evidence integrates to 1 / y,
    giving y / theta**2 * f_u(y / theta).
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise DomainError("theta must be positive")
    s = model.shape
    u = model.y / theta
    log_fu = s * math.log(s) - special.gammaln(s) + (s - 1.0) * np.log(u) - s * u
    prior = 1.0 / theta
    likelihood = np.exp(log_fu) / theta
    evidence = 1.0 / model.y
    return (prior * likelihood / evidence)[()]


def generate_data(theta, n, alpha, rng, size=None):
    """Sample means of ``n`` Gamma(alpha, theta/alpha) observations.

    Drawn through the sufficient statistic y = theta * u, which has the same law.
    """
    if not theta > 0:
        raise DomainError("theta must be positive")
    shape = n * alpha
    return theta * sample_gamma(shape, 1.0 / shape, as_generator(rng), size)
