"""Fiducial estimation and prediction in the linear model y = X beta + u, u ~ N(0, I).

The fiducial for theta = X beta is the law of p (y - U), where p projects onto
the column span of X. The optimal estimate of gamma = A theta under squared
norm loss is A p y; it depends on y only through p y, so it is the same for
every coefficient vector reproducing the fit, even for rank-deficient X.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .stochastics import as_generator


def _rank_tolerance(shape, s):
    return max(shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)


@dataclass(frozen=True)
class Projector:
    """Orthogonal projector onto range(X) with the rank used to build it."""

    matrix: np.ndarray
    rank: int

    def __matmul__(self, other):
        return self.matrix @ other

    @property
    def complement(self):
        """Projector 1 - p onto the orthogonal complement (the maximal invariant)."""
        return np.eye(self.matrix.shape[0]) - self.matrix


def projection(design):
    """Projector onto the column span of ``design`` via a thin SVD."""
    x = np.atleast_2d(np.asarray(design, dtype=float))
    if x.size == 0:
        raise DomainError("design must be non-empty")
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    rank = int(np.sum(s > _rank_tolerance(x.shape, s))) if s[0] > 0 else 0
    basis = u[:, :rank]
    p = basis @ basis.T
    p = 0.5 * (p + p.T)
    p.setflags(write=False)
    return Projector(p, rank)


@dataclass(frozen=True)
class LinearModel:
    """Design ``X`` (m x p) and observation ``y`` (length m); unit Gaussian noise."""

    design: np.ndarray
    observation: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.design, dtype=float))
        y = np.asarray(self.observation, dtype=float).ravel()
        if x.shape[0] != y.size:
            raise DomainError(f"design has {x.shape[0]} rows but observation has {y.size} entries")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("design and observation must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "design", x)
        object.__setattr__(self, "observation", y)
        object.__setattr__(self, "_projector", projection(x))

    @property
    def projector(self):
        return self._projector

    @property
    def rank(self):
        return self._projector.rank

    @property
    def fit(self):
        """Least-squares fitted values p y."""
        return self._projector @ self.observation

    def with_observation(self, y):
        return LinearModel(self.design, y)

    def coefficients(self):
        """Minimum-norm least-squares coefficients."""
        x = self.design
        rcond = _rank_tolerance(x.shape, np.array([1.0]))
        return np.linalg.pinv(x, rcond=rcond) @ self.observation

    def sample(self, count, rng=None):
        return fiducial_theta_sample(self, rng, count)

    def mean(self):
        return self.fit


def fiducial_theta_sample(model, rng, count):
    """``count`` fiducial draws of theta, as rows p (y - U) with U ~ N(0, I)."""
    count = int(count)
    if count < 1:
        raise DomainError("count must be at least 1")
    m = model.observation.size
    noise = as_generator(rng).standard_normal((count, m))
    return (model.observation - noise) @ model.projector.matrix


def _as_operator(a, m):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != m:
        raise DomainError(f"operator must have {m} columns, got shape {a.shape}")
    return a


def optimal_estimate(a, model):
    """Fiducial-optimal estimate A p y of gamma = A theta."""
    op = _as_operator(a, model.observation.size)
    out = op @ model.fit
    return out if np.ndim(a) == 2 else out[0]


def in_row_space(x_star, model, tol=1e-9):
    """True when x_star = A X for some A, i.e. x_star lies in the row space of X."""
    x_star = np.atleast_2d(np.asarray(x_star, dtype=float))
    row_proj = projection(model.design.T).matrix
    resid = x_star - x_star @ row_proj
    scale = max(1.0, float(np.max(np.abs(x_star))))
    return np.max(np.abs(resid), axis=1) <= tol * scale


def predict(x_star, model):
    """Prediction x_star . beta_hat with the minimum-norm least-squares beta_hat.

    For x_star in the row space of X this equals the optimal estimate of
    x_star beta. Otherwise it is the estimate for the projected x_star, the
    least-squares choice of A.
    """
    x_star = np.asarray(x_star, dtype=float)
    p = model.design.shape[1]
    if x_star.shape[-1] != p or x_star.ndim > 2:
        raise DomainError(f"x_star must have {p} entries per row, got shape {x_star.shape}")
    return x_star @ model.coefficients()
