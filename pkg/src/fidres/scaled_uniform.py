"""Scaled uniform model y = theta * u, u = (max, min) of n Uniform(1 - k, 1 + k).

Conditioning the generator on the maximal invariant u_min / u_max gives the
fiducial theta ~ Pareto(index n) truncated to [y_max / (1 + k), y_min / (1 - k)].

With b = upper / lower the optimal actions are closed-form:

* loss (theta - x)**2 / theta**2: ``a/(a-1) * (1 - b**(1-a)) / (1 - b**(-a)) * lower``
  with ``a = n + 2``;
* loss (ln theta - ln x)**2: ``exp(1/n - ln(b) / (b**n - 1)) * lower``.

The second expression is what integration of ln theta against the truncated
Pareto gives, and it tends to ``lower`` as b -> 1. Writing the denominator as
``1 - b**n`` instead flips the sign of the log term and gives the wrong limit
``lower * exp(2/n)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, InconsistentDataError
from .stochastics import (
    as_generator,
    sample_trunc_pareto,
    trunc_pareto_cdf,
    trunc_pareto_ppf,
)

_SUPPORT_RTOL = 1e-12


@dataclass(frozen=True)
class TruncatedPareto:
    """Density proportional to theta**(-index-1) on [lower, upper]."""

    lower: float
    upper: float
    index: float

    def __post_init__(self):
        if not (0 < self.lower <= self.upper):
            raise DomainError(f"need 0 < lower <= upper, got [{self.lower}, {self.upper}]")
        if not self.index > 0:
            raise DomainError("index must be positive")

    @property
    def ratio(self):
        """b = upper / lower >= 1."""
        return self.upper / self.lower

    def pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        n, lo = self.index, self.lower
        if self.lower == self.upper:
            raise DomainError("degenerate truncated Pareto has no density")
        norm = -math.expm1(-n * math.log(self.ratio))
        inside = (theta >= lo) & (theta <= self.upper)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = n / lo * (np.where(inside, theta, lo) / lo) ** (-n - 1.0) / norm
        return np.where(inside, val, 0.0)[()]

    def cdf(self, theta):
        return trunc_pareto_cdf(theta, self.lower, self.upper, self.index)

    def ppf(self, q):
        return trunc_pareto_ppf(q, self.lower, self.upper, self.index)

    def median(self):
        return float(self.ppf(0.5))

    def sample(self, count, rng=None):
        return sample_trunc_pareto(self.lower, self.upper, self.index, as_generator(rng), int(count))

    def _power_moment(self, s):
        """E theta**s in closed form."""
        n, lo = self.index, self.lower
        log_b = math.log(self.ratio)
        if log_b == 0.0:
            return lo**s
        norm = -math.expm1(-n * log_b)
        if s == n:
            return lo**s * n * log_b / norm
        # integral of n t^(s-n-1) on [1, b], t = theta / lower
        return lo**s * n * math.expm1((s - n) * log_b) / (s - n) / norm

    def mean(self):
        return self._power_moment(1.0)

    def expect_inverse(self, k):
        return self._power_moment(-float(k))

    def expect_log(self):
        n = self.index
        log_b = math.log(self.ratio)
        if log_b == 0.0:
            return math.log(self.lower)
        return math.log(self.lower) + 1.0 / n - log_b / math.expm1(n * log_b)


@dataclass(frozen=True)
class ScaledUniformData:
    """Sample size ``n``, spread ``k`` and the observed maximum/minimum."""

    n: int
    k: float
    y1: float
    y2: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        if not 0 < self.k < 1:
            raise DomainError(f"k must lie in (0, 1), got {self.k}")
        if not (0 < self.y2 <= self.y1):
            raise DomainError(f"need 0 < min <= max, got min={self.y2}, max={self.y1}")
        lower, upper = self.y1 / (1 + self.k), self.y2 / (1 - self.k)
        if lower > upper * (1 + _SUPPORT_RTOL):
            raise InconsistentDataError(
                f"no theta is compatible with max={self.y1}, min={self.y2} at k={self.k}: "
                f"{lower} > {upper}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_observations(cls, observations, k):
        obs = np.asarray(observations, dtype=float).ravel()
        if obs.size < 2:
            raise DomainError("need at least two observations")
        if np.any(obs <= 0) or not np.all(np.isfinite(obs)):
            raise DomainError("observations must be finite and positive")
        return cls(obs.size, k, float(obs.max()), float(obs.min()))

    @property
    def theta_ml(self):
        return self.y1 / (1 + self.k)

    @property
    def theta_mu(self):
        return max(self.y2 / (1 - self.k), self.theta_ml)

    @property
    def ancillary(self):
        """Observed maximal invariant y_min / y_max."""
        return self.y2 / self.y1


def fiducial(data):
    return TruncatedPareto(data.theta_ml, data.theta_mu, data.n)


def _bounds(n, k, y1, y2):
    lower = np.asarray(y1, dtype=float) / (1 + k)
    upper = np.maximum(np.asarray(y2, dtype=float) / (1 - k), lower)
    return lower, upper


def invariant_sq_action(n, k, y1, y2):
    """Vectorized E(1/theta) / E(1/theta^2) for the truncated Pareto fiducial."""
    lower, upper = _bounds(n, k, y1, y2)
    a = n + 2.0
    log_b = np.log(upper / lower)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.expm1((1.0 - a) * log_b) / np.expm1(-a * log_b)
    ratio = np.where(log_b > 0, ratio, (a - 1.0) / a)
    return (a / (a - 1.0) * ratio * lower)[()]


def log_sq_action(n, k, y1, y2):
    """Vectorized exp(E ln theta) for the truncated Pareto fiducial."""
    lower, upper = _bounds(n, k, y1, y2)
    log_b = np.log(upper / lower)
    with np.errstate(invalid="ignore", divide="ignore"):
        shift = 1.0 / n - log_b / np.expm1(n * log_b)
    shift = np.where(log_b > 0, shift, 0.0)
    return (np.exp(shift) * lower)[()]


def estimate_invariant_sq(data):
    return float(invariant_sq_action(data.n, data.k, data.y1, data.y2))


def estimate_log_sq(data):
    return float(log_sq_action(data.n, data.k, data.y1, data.y2))


def _check_params(theta, n, k):
    if not theta > 0:
        raise DomainError("theta must be positive")
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    if not 0 < k < 1:
        raise DomainError("k must lie in (0, 1)")


def generate_batch(theta, n, k, rng, size):
    """``size`` datasets as an array of (max, min) rows."""
    _check_params(theta, n, k)
    u = as_generator(rng).uniform(1 - k, 1 + k, (size, int(n)))
    return theta * np.column_stack([u.max(axis=1), u.min(axis=1)])


def generate_data(theta, n, k, rng):
    y1, y2 = generate_batch(theta, n, k, rng, 1)[0]
    return ScaledUniformData(int(n), k, float(y1), float(y2))


def generate_conditional_batch(theta, n, k, ancillary, rng, size):
    """Datasets drawn conditionally on the maximal invariant u_min / u_max = ``ancillary``.

    Given the ratio a, u_max has density proportional to u**(n-1) on
    [(1 - k) / a, 1 + k]; u_min = a * u_max.
    """
    _check_params(theta, n, k)
    a = float(ancillary)
    lo, hi = (1 - k) / a, 1 + k
    if not (0 < a <= 1) or lo > hi:
        raise InconsistentDataError(f"ancillary {a} is impossible at k={k}")
    v = as_generator(rng).random(size)
    u1 = (lo**n + v * (hi**n - lo**n)) ** (1.0 / n)
    return theta * np.column_stack([u1, a * u1])

