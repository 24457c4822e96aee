"""Seeded random streams, samplers and Monte Carlo summaries.

Every Monte Carlo routine in the package draws from a ``numpy.random.Generator``.
:class:`RngStream` builds one on the counter-based Philox bit generator keyed by
``(seed, stream_id)``, so independent tasks get independent, reproducible
streams without coordinating.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .exceptions import DomainError


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Equal identifiers give bitwise-identical draws. A stream is single-owner
    mutable state; use :meth:`substream` to hand out independent streams to
    parallel tasks.
    """

    def __init__(self, seed=0, stream_id=0, _path=()):
        seed = int(seed)
        stream_id = int(stream_id)
        if not (0 <= seed < 2**64 and 0 <= stream_id < 2**64):
            raise DomainError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = seed
        self.stream_id = stream_id
        self._path = tuple(int(p) for p in _path)
        seq = np.random.SeedSequence(seed, spawn_key=(stream_id,) + self._path)
        self.generator = np.random.Generator(np.random.Philox(seq))

    def substream(self, index):
        """Independent child stream number ``index`` of this stream."""
        return RngStream(self.seed, self.stream_id, self._path + (int(index),))

    def __repr__(self):
        path = f", path={self._path}" if self._path else ""
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}{path})"


def as_generator(rng=None):
    """Coerce ``rng`` (None, int seed, RngStream or Generator) to a Generator."""
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return RngStream(0).generator
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def _check_positive(name, value):
    value = float(value)
    if not value > 0.0 or not np.isfinite(value):
        raise DomainError(f"{name} must be a finite positive number, got {value}")
    return value


def sample_std_normal(rng, size=None):
    return as_generator(rng).standard_normal(size)


def sample_gamma(shape, scale, rng, size=None):
    """Gamma(shape, scale) draws; mean shape*scale, variance shape*scale**2."""
    shape = _check_positive("shape", shape)
    scale = _check_positive("scale", scale)
    return scale * as_generator(rng).standard_gamma(shape, size)


def sample_chi_square(df, rng, size=None):
    """Chi-square draws, generated as Gamma(df / 2, 2)."""
    df = _check_positive("df", df)
    return sample_gamma(0.5 * df, 2.0, rng, size)


def _check_pareto(lower, upper, index):
    lower = _check_positive("lower", lower)
    upper = _check_positive("upper", upper)
    index = _check_positive("index", index)
    if lower > upper:
        raise DomainError(f"truncation interval is empty: lower {lower} > upper {upper}")
    return lower, upper, index


def trunc_pareto_cdf(theta, lower, upper, index):
    """CDF of the density proportional to theta**(-index-1) on [lower, upper]."""
    lower, upper, index = _check_pareto(lower, upper, index)
    theta = np.asarray(theta, dtype=float)
    if lower == upper:
        return np.where(theta >= lower, 1.0, 0.0)[()]
    t = np.clip(theta, lower, upper)
    out = np.expm1(-index * np.log(t / lower)) / np.expm1(-index * np.log(upper / lower))
    return out[()]


def trunc_pareto_ppf(q, lower, upper, index):
    """Inverse of :func:`trunc_pareto_cdf`."""
    lower, upper, index = _check_pareto(lower, upper, index)
    q = np.asarray(q, dtype=float)
    if np.any((q < 0.0) | (q > 1.0)):
        raise DomainError("probabilities must lie in [0, 1]")
    if lower == upper:
        return np.full_like(q, lower)[()]
    mass = -np.expm1(-index * np.log(upper / lower))
    out = lower * np.exp(-np.log1p(-q * mass) / index)
    return np.clip(out, lower, upper)[()]


def sample_trunc_pareto(lower, upper, index, rng, size=None):
    """Inverse-CDF draws from the truncated Pareto on [lower, upper]."""
    lower, upper, index = _check_pareto(lower, upper, index)
    u = as_generator(rng).random(size)
    return trunc_pareto_ppf(u, lower, upper, index)


def ks_statistic(draws, cdf):
    """Kolmogorov-Smirnov distance between the empirical CDF of ``draws`` and ``cdf``.

    ``cdf`` should accept an array; scalar-only callables are vectorized.
    """
    x = np.sort(np.asarray(draws, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise DomainError("ks_statistic needs at least one draw")
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise ValueError
    except (TypeError, ValueError):
        f = np.array([float(cdf(v)) for v in x])
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_pvalue(statistic, n):
    """Two-sided p-value of a KS statistic from ``n`` draws (exact distribution)."""
    return float(stats.kstwo.sf(statistic, int(n)))


def ks_critical_value(n, level=0.01):
    return float(stats.kstwo.isf(level, int(n)))


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo mean with its standard error over ``n`` evaluations."""

    mean: float
    std_error: float
    n: int
    n_failed: int = field(default=0, compare=False)

    @classmethod
    def from_values(cls, values, n_failed=0):
        values = np.asarray(values, dtype=float).ravel()
        n = values.size
        if n < 2:
            raise DomainError("a risk estimate needs at least two evaluations")
        se = float(np.std(values, ddof=1) / np.sqrt(n))
        return cls(float(np.mean(values)), se, n, int(n_failed))

    def combined_se(self, other):
        return float(np.hypot(self.std_error, other.std_error))

    def agrees_with(self, other, k=3.0):
        """True when the two means differ by at most ``k`` combined standard errors."""
        return abs(self.mean - other.mean) <= k * self.combined_se(other)

    def to_dict(self):
        return {"mean": self.mean, "std_error": self.std_error, "n": self.n,
                "n_failed": self.n_failed}
