"""Fiducial distribution of the correlation of a binormal sample.

The fiducial density of rho given the empirical correlation r of ``n`` points
uses ``nu = n - 1`` degrees of freedom; with this convention the four-point
Fisher example has fiducial median 0.9748.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .exceptions import DomainError
from .specfun import gauss_2f1, ln_beta
from .stochastics import as_generator, sample_chi_square, sample_std_normal

ENDPOINT_EPS = 1e-12
_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
_RAO_MAX_NU = 6
# Gauss-Legendre rule for short CDF segments; used only when the segment is
# short relative to its distance from the +-1 endpoint singularities.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)
_GL_MAX_RELATIVE_LENGTH = 0.02
_CDF_BATCH_MIN = 64


@dataclass(frozen=True)
class Sample2D:
    """``n >= 3`` points in the plane, stored as an ``(n, 2)`` float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DomainError(f"points must have shape (n, 2), got {pts.shape}")
        if pts.shape[0] < 3:
            raise DomainError(f"need at least 3 points, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points must be finite")
        if np.ptp(pts[:, 0]) == 0.0:
            raise DomainError("x-coordinates are all equal (degenerate variance)")
        if np.ptp(pts[:, 1]) == 0.0:
            raise DomainError("y-coordinates are all equal (degenerate variance)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]


@dataclass(frozen=True)
class BinormalParams:
    mu_x: float = 0.0
    mu_y: float = 0.0
    sigma_x: float = 1.0
    sigma_y: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise DomainError("sigma_x and sigma_y must be positive")
        if not abs(self.rho) < 1:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")

    def transform(self):
        """Lower-triangular map taking standard normal (u, v) to centred (x, y)."""
        return np.array([
            [self.sigma_x, 0.0],
            [self.rho * self.sigma_y, math.sqrt(1.0 - self.rho**2) * self.sigma_y],
        ])

    def covariance(self):
        t = self.transform()
        return t @ t.T


@dataclass(frozen=True)
class CorrelationFiducial:
    """Fiducial law of rho given empirical correlation ``r`` and ``nu`` degrees of freedom.

    Degrees of freedom below 2 are refused: the density then has integrable
    but unbounded endpoint singularities that the quadrature does not handle.
    """

    r: float
    nu: float

    def __post_init__(self):
        r = float(self.r)
        nu = float(self.nu)
        if not np.isfinite(r) or abs(r) >= 1.0:
            sign = "-" if r < 0 else ""
            shown = f"{sign}1" if abs(r) == 1.0 else f"{r}"
            raise DomainError(f"degenerate correlation r = {shown}")
        if not nu >= 2.0 or not np.isfinite(nu):
            raise DomainError(f"nu must be at least 2, got {nu}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "nu", nu)

    @classmethod
    def from_sample(cls, sample):
        return cls(empirical_correlation(sample), sample.n - 1)

    @property
    def _log_const(self):
        nu = self.nu
        return (0.5 * (nu - 1.0) * math.log1p(-self.r**2)
                - 0.5 * math.log(2.0) - ln_beta(nu + 0.5, 0.5))

    def _pdf_scalar(self, rho, log_const=None):
        nu, r = self.nu, self.r
        if log_const is None:
            log_const = self._log_const
        log_val = log_const + (0.5 - nu) * math.log1p(-r * rho)
        if nu != 2.0:
            one_minus_rho2 = (1.0 - rho) * (1.0 + rho)
            if one_minus_rho2 <= 0.0:
                return 0.0
            log_val += 0.5 * (nu - 2.0) * math.log(one_minus_rho2)
        return math.exp(log_val) * gauss_2f1(1.5, -0.5, nu + 0.5, 0.5 * (1.0 + r * rho))

    def pdf(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(np.abs(rho) >= 1.0):
            raise DomainError("rho must lie strictly inside (-1, 1)")
        c = self._log_const
        out = np.array([self._pdf_scalar(v, c) for v in rho.ravel()]).reshape(rho.shape)
        return out[()]

    def _integral(self, lo, hi, weight=None):
        c = self._log_const
        if weight is None:
            f = lambda t: self._pdf_scalar(t, c)  # noqa: E731
        else:
            f = lambda t: weight(t) * self._pdf_scalar(t, c)  # noqa: E731
        points = [self.r] if lo < self.r < hi else None
        return integrate.quad(f, lo, hi, points=points, **_QUAD_OPTS)[0]

    def _cdf_scalar(self, rho):
        if rho <= -1.0 + ENDPOINT_EPS:
            return 0.0
        if rho >= 1.0 - ENDPOINT_EPS:
            return 1.0
        return min(1.0, max(0.0, self._integral(-1.0 + ENDPOINT_EPS, rho)))

    def cdf(self, rho):
        rho = np.asarray(rho, dtype=float)
        flat = rho.ravel()
        if flat.size >= _CDF_BATCH_MIN:
            out = self._cdf_batch(flat)
        else:
            out = np.array([self._cdf_scalar(v) for v in flat])
        return out.reshape(rho.shape)[()]

    def _cdf_batch(self, flat):
        """CDF at many points by integrating between consecutive sorted points."""
        lo, hi = -1.0 + ENDPOINT_EPS, 1.0 - ENDPOINT_EPS
        order = np.argsort(flat)
        pts = np.clip(flat[order], lo, hi)
        edges = np.concatenate([[lo], pts])
        a, b = edges[:-1], edges[1:]
        h = b - a
        dist = 1.0 - np.maximum(np.abs(a), np.abs(b))
        short = (h <= _GL_MAX_RELATIVE_LENGTH * dist) & (a > lo)
        pieces = np.zeros(pts.size)
        if np.any(short):
            mid, half = 0.5 * (a[short] + b[short]), 0.5 * h[short]
            nodes = mid[:, None] + half[:, None] * _GL_NODES
            pieces[short] = half * (self.pdf(nodes) @ _GL_WEIGHTS)
        for i in np.flatnonzero(~short & (h > 0)):
            pieces[i] = self._integral(a[i], b[i])
        out = np.empty(pts.size)
        out[order] = np.clip(np.cumsum(pieces), 0.0, 1.0)
        out[flat <= lo] = 0.0
        out[flat >= hi] = 1.0
        return out

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise DomainError("probabilities must lie strictly inside (0, 1)")
        lo, hi = -1.0 + ENDPOINT_EPS, 1.0 - ENDPOINT_EPS
        out = [optimize.brentq(lambda t, q=q: self._cdf_scalar(t) - q, lo, hi,
                               xtol=1e-14, rtol=1e-14, maxiter=200)
               for q in p.ravel()]
        return np.array(out).reshape(p.shape)[()]

    def median(self):
        return float(self.ppf(0.5))

    def mean(self):
        return self._integral(-1.0 + ENDPOINT_EPS, 1.0 - ENDPOINT_EPS, weight=lambda t: t)

    def total_mass(self):
        return self._integral(-1.0 + ENDPOINT_EPS, 1.0 - ENDPOINT_EPS)

    def interval(self, level):
        """Equal-tailed interval with fiducial probability ``level``."""
        if not 0.0 < level < 1.0:
            raise DomainError("level must lie in (0, 1)")
        lo, hi = self.ppf([(1.0 - level) / 2.0, (1.0 + level) / 2.0])
        return float(lo), float(hi)

    def sample(self, count, rng=None):
        return elfving_sample(self, rng, count)


def empirical_correlation(sample):
    """Pearson correlation of the points; exact collinearity returns +-1."""
    if not isinstance(sample, Sample2D):
        sample = Sample2D(sample)
    dx = sample.x - sample.x.mean()
    dy = sample.y - sample.y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DomainError("degenerate variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    if abs(r) > 1.0 - 1e-13:
        r = math.copysign(1.0, r)
    return r


def empirical_correlation_batch(x, y):
    """Row-wise Pearson correlation of ``(reps, n)`` arrays."""
    dx = x - x.mean(axis=1, keepdims=True)
    dy = y - y.mean(axis=1, keepdims=True)
    return np.einsum("ij,ij->i", dx, dy) / np.sqrt(
        np.einsum("ij,ij->i", dx, dx) * np.einsum("ij,ij->i", dy, dy))


def fiducial_density(rho, fid):
    return fid.pdf(rho)


def fiducial_cdf(rho, fid):
    return fid.cdf(rho)


def fiducial_quantile(p, fid):
    return fid.ppf(p)


def elfving_solve(r, m1, m2, m3):
    """Solve the Elfving pivot equation for rho given r and pivots (m1, m2, m3).

    sqrt(m1) rho / sqrt(1 - rho^2) - sqrt(m2) r / sqrt(1 - r^2) = m3
    """
    t = (np.asarray(m3) + np.sqrt(m2) * (r / math.sqrt(1.0 - r * r))) / np.sqrt(m1)
    return t / np.sqrt(1.0 + t * t)


def elfving_sample(fid, rng, count):
    """``count`` fiducial draws of rho through the Elfving parameter generating equation.

    The pivots are independent: m1 ~ chi2(nu), m2 ~ chi2(nu - 1), m3 ~ N(0, 1).
    """
    count = int(count)
    if count < 1:
        raise DomainError("count must be at least 1")
    gen = as_generator(rng)
    m1 = sample_chi_square(fid.nu, gen, count)
    m2 = sample_chi_square(fid.nu - 1.0, gen, count)
    m3 = sample_std_normal(gen, count)
    return elfving_solve(fid.r, m1, m2, m3)


def _rao_kernel(c):
    theta = math.acos(-c)
    return (theta - 0.5 * math.sin(2.0 * theta)) / math.sin(theta) ** 3


# Central-difference stencils (offset multiples of h, weights, scaling power).
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5), 1),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0), 2),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5), 3),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0), 4),
}


def _derivative(f, x, order, h, levels=3):
    """Central-difference derivative refined by Richardson extrapolation in h**2."""
    offsets, weights, power = _STENCILS[order]

    def diff(step):
        return sum(w * f(x + o * step) for o, w in zip(offsets, weights)) / step**power

    table = [diff(h / 2**i) for i in range(levels)]
    for j in range(1, levels):
        factor = 4.0**j
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0)
                 for i in range(len(table) - 1)]
    return table[0]


def rao_density(rho, fid):
    """Rao's closed-form fiducial density, for integer nu in [2, 6].

    Differentiates g(c) = (theta - sin(2 theta) / 2) / sin(theta)**3 with
    cos(theta) = -c, (nu - 2) times at c = rho * r. Intended as an independent
    check on :meth:`CorrelationFiducial.pdf`, not a production path.
    """
    nu = fid.nu
    if nu != int(nu) or not 2 <= nu <= _RAO_MAX_NU:
        raise DomainError(f"rao_density supports integer nu in [2, {_RAO_MAX_NU}], got {nu}")
    rho = float(rho)
    c = rho * fid.r
    if abs(rho) >= 1.0 or abs(c) >= 1.0:
        raise DomainError("rao_density requires |rho| < 1 and |rho * r| < 1")
    order = int(nu) - 2
    if order == 0:
        deriv = _rao_kernel(c)
    else:
        h = max(1e-2, abs(c) * 1e-2)
        h = min(h, (1.0 - abs(c)) / 2.5)
        deriv = _derivative(_rao_kernel, c, order, h)
    prefactor = ((1.0 - fid.r**2) ** (0.5 * (nu - 1.0)) * (1.0 - rho**2) ** (0.5 * (nu - 2.0))
                 / (math.pi * math.factorial(order)))
    return prefactor * deriv


def binormal_generate(params, n, rng):
    """``n`` points from the lower-triangular location-scale map of standard normals."""
    n = int(n)
    if n < 3:
        raise DomainError("n must be at least 3")
    gen = as_generator(rng)
    uv = gen.standard_normal((n, 2))
    pts = np.array([params.mu_x, params.mu_y]) + uv @ params.transform().T
    return Sample2D(pts)


def binormal_batch(params, n, reps, rng):
    """``reps`` independent binormal samples as ``(x, y)`` arrays of shape (reps, n)."""
    gen = as_generator(rng)
    u = gen.standard_normal((reps, n))
    v = gen.standard_normal((reps, n))
    t = params.transform()
    x = params.mu_x + t[0, 0] * u
    y = params.mu_y + t[1, 0] * u + t[1, 1] * v
    return x, y


def estimate_rho_absolute_loss(sample):
    """Fiducial median of rho: the optimal point estimate under absolute loss."""
    return CorrelationFiducial.from_sample(sample).median()
