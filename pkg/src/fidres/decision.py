"""Losses, fiducial and frequentist risk, risk minimization, and the
equivariant-risk consistency check.

A *fiducial sampler* is any object with ``sample(count, rng) -> ndarray``.
Optional closed-form hooks are used when present: ``mean()``, ``median()``,
``ppf(q)``, ``expect_inverse(k)`` (E gamma**-k) and ``expect_log()``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DomainError,
    EvaluationError,
    PreconditionError,
    UndefinedActionError,
)
from .stochastics import RiskEstimate, RngStream, as_generator

MAX_FAILURE_FRACTION = 1e-3
AGREEMENT_SE = 3.0

LOSS_KINDS = ("absolute", "squared", "scale_invariant_sq", "log_sq", "squared_norm")
_POSITIVE_KINDS = ("scale_invariant_sq", "log_sq")


@dataclass(frozen=True)
class LossSpec:
    """A named loss l(gamma, x) >= 0 with l(gamma, gamma) = 0.

    ``scale_invariant_sq`` is (gamma - x)**2 / gamma**2 and ``log_sq`` is
    (ln gamma - ln x)**2; both require positive arguments and are invariant
    under joint rescaling. ``squared_norm`` sums squared differences over the
    last axis.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise DomainError(f"unknown loss {self.kind!r}; choose from {', '.join(LOSS_KINDS)}")

    @property
    def scale_invariant(self):
        return self.kind in _POSITIVE_KINDS

    def values(self, gamma, x):
        """Vectorized loss; entries outside the domain come back as NaN."""
        gamma = np.asarray(gamma, dtype=float)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "absolute":
                out = np.abs(gamma - x)
            elif self.kind == "squared":
                out = (gamma - x) ** 2
            elif self.kind == "scale_invariant_sq":
                out = np.where((gamma > 0) & (x > 0), ((gamma - x) / gamma) ** 2, np.nan)
            elif self.kind == "log_sq":
                out = np.where((gamma > 0) & (x > 0),
                               (np.log(np.where(gamma > 0, gamma, 1.0))
                                - np.log(np.where(x > 0, x, 1.0))) ** 2, np.nan)
            else:
                out = np.sum((gamma - x) ** 2, axis=-1)
        return np.where(np.isfinite(out), out, np.nan)

    def __call__(self, gamma, x):
        out = self.values(gamma, x)
        if np.any(np.isnan(out)):
            raise DomainError(f"{self.kind} loss is undefined at gamma={gamma}, x={x}")
        return out[()] if out.ndim else float(out)


def loss(spec, gamma, x):
    if isinstance(spec, str):
        spec = LossSpec(spec)
    return spec(gamma, x)


class FiducialSampler:
    """Wrap a draw function ``draw(count, generator)`` with optional moment hooks."""

    def __init__(self, draw, **hooks):
        self._draw = draw
        for name, value in hooks.items():
            setattr(self, name, value)

    def sample(self, count, rng=None):
        return np.asarray(self._draw(int(count), as_generator(rng)))

    @classmethod
    def point_mass(cls, value):
        value = float(value)
        return cls(lambda count, gen: np.full(count, value),
                   mean=lambda: value, median=lambda: value, ppf=lambda q: np.full_like(q, value),
                   expect_inverse=lambda k: value ** (-k), expect_log=lambda: math.log(value))


def _checked_losses(spec, gamma, x, what):
    values = spec.values(gamma, x)
    bad = np.isnan(values)
    n_bad = int(np.count_nonzero(bad))
    if n_bad > MAX_FAILURE_FRACTION * values.size:
        raise EvaluationError(f"{what}: {n_bad} of {values.size} evaluations failed")
    return values[~bad], n_bad


def fiducial_risk(sampler, action, spec, n_draws, rng):
    """Monte Carlo fiducial risk E l(Gamma, action) with its standard error."""
    spec = LossSpec(spec) if isinstance(spec, str) else spec
    if n_draws < 100:
        raise DomainError("n_draws must be at least 100")
    draws = sampler.sample(int(n_draws), as_generator(rng))
    values, n_bad = _checked_losses(spec, draws, action, "fiducial risk")
    return RiskEstimate.from_values(values, n_bad)


def _hook(sampler, name):
    fn = getattr(sampler, name, None)
    return fn if callable(fn) else None


def _finite_action(value):
    value = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(value)):
        raise UndefinedActionError("the optimal action is not finite")
    return value[()] if value.ndim else float(value)


def _golden_section(f, lo, hi, tol=1e-10, max_iter=200):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def minimize_fiducial_risk(sampler, spec, rng=None, n_draws=200_000, method="auto"):
    """Action minimizing the fiducial risk of ``spec``.

    ``method="auto"`` uses the closed-form minimizer of each loss (mean,
    median, E(1/G)/E(1/G^2), exp E ln G), preferring the sampler's analytic
    hooks over Monte Carlo averages. ``method="search"`` runs golden-section
    search on a common-random-numbers Monte Carlo objective over the fiducial
    0.001..0.999 quantile range (scalar actions only).
    """
    spec = LossSpec(spec) if isinstance(spec, str) else spec
    if method not in ("auto", "search"):
        raise DomainError(f"unknown method {method!r}")
    gen = as_generator(rng)
    draws = None

    def sample():
        nonlocal draws
        if draws is None:
            draws = np.asarray(sampler.sample(int(n_draws), gen), dtype=float)
        return draws

    if method == "search":
        if spec.kind == "squared_norm":
            raise DomainError("golden-section search needs a scalar action")
        return _search_minimizer(sampler, spec, sample())

    kind = spec.kind
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind in ("squared", "squared_norm"):
            hook = _hook(sampler, "mean")
            return _finite_action(hook() if hook else np.mean(sample(), axis=0))
        if kind == "absolute":
            hook = _hook(sampler, "median")
            return _finite_action(hook() if hook else np.median(sample()))
        if kind == "scale_invariant_sq":
            hook = _hook(sampler, "expect_inverse")
            if hook:
                return _finite_action(hook(1) / hook(2))
            g = sample()
            return _finite_action(np.mean(1.0 / g) / np.mean(1.0 / g**2))
        hook = _hook(sampler, "expect_log")
        return _finite_action(math.exp(hook()) if hook else np.exp(np.mean(np.log(sample()))))


def _search_minimizer(sampler, spec, draws):
    ppf = _hook(sampler, "ppf")
    if ppf is not None:
        lo, hi = (float(v) for v in np.atleast_1d(ppf(np.array([0.001, 0.999]))))
    else:
        lo, hi = np.quantile(draws, [0.001, 0.999])
    if lo == hi:
        return float(lo)

    def objective(x):
        values = spec.values(draws, x)
        return float(np.nanmean(values))

    if spec.kind == "log_sq":
        # unimodal in ln x
        return float(math.exp(_golden_section(lambda t: objective(math.exp(t)),
                                              math.log(lo), math.log(hi))))
    return float(_golden_section(objective, lo, hi))


def frequentist_risk(generator, estimator, spec, theta, n_reps, rng, parameter=None):
    """Monte Carlo risk E l(gamma(theta), estimator(data)) over fresh datasets.

    ``generator(theta, rng, size)`` returns a batch of ``size`` datasets along
    the leading axis and ``estimator(batch)`` the matching array of actions
    (NaN marks a failed estimate). ``parameter`` maps theta to the focus
    parameter gamma; it defaults to the identity.
    """
    spec = LossSpec(spec) if isinstance(spec, str) else spec
    if n_reps < 100:
        raise DomainError("n_reps must be at least 100")
    gen = as_generator(rng)
    batch = generator(theta, gen, int(n_reps))
    actions = np.asarray(estimator(batch), dtype=float)
    gamma = theta if parameter is None else parameter(theta)
    values, n_bad = _checked_losses(spec, gamma, actions, "frequentist risk")
    return RiskEstimate.from_values(values, n_bad)


def task_streams(rng, count):
    """One independent random stream per task, derived deterministically from ``rng``."""
    if isinstance(rng, RngStream):
        return [rng.substream(i) for i in range(count)]
    if isinstance(rng, np.random.Generator):
        return rng.spawn(count)
    return [RngStream(0 if rng is None else int(rng)).substream(i) for i in range(count)]


@dataclass
class RiskIdentityReport:
    """Frequentist risks over theta and fiducial risks over observed data."""

    family: str
    estimator: str
    loss: str
    frequentist: dict
    fiducial: dict
    passed: bool
    worst_discrepancy_se: float
    candidates: dict = field(default_factory=dict)

    def estimates(self):
        return list(self.frequentist.values()) + list(self.fiducial.values())

    def to_dict(self):
        return {
            "family": self.family,
            "estimator": self.estimator,
            "loss": self.loss,
            "frequentist": [{"theta": _jsonable(t), **r.to_dict()}
                            for t, r in self.frequentist.items()],
            "fiducial": [{"data": _jsonable(d), **r.to_dict()} for d, r in self.fiducial.items()],
            "passed": self.passed,
            "worst_discrepancy_se": self.worst_discrepancy_se,
            "candidates": {name: [{"theta": _jsonable(t), **r.to_dict()} for t, r in rows.items()]
                           for name, rows in self.candidates.items()},
        }


def _jsonable(value):
    arr = np.asarray(value)
    return arr.tolist() if arr.ndim else float(arr)


def _close(a, b, rtol=1e-9):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.allclose(a, b, rtol=rtol, atol=rtol * max(1.0, float(np.max(np.abs(b))))))


def check_equivariance(family, estimator):
    """Raise PreconditionError unless estimator(g y) = g estimator(y) for test elements g."""
    ref = family.reference_batch()
    base = estimator(ref)
    for g in family.group_elements():
        lhs = estimator(family.act_data(g, ref))
        rhs = family.act_action(g, base)
        if not _close(lhs, rhs):
            raise PreconditionError(
                f"estimator is not equivariant at group element {g!r}",
                violation=(g, np.asarray(lhs).tolist(), np.asarray(rhs).tolist()))


def check_invariance(family, spec):
    """Raise PreconditionError unless l(g gamma, g x) = l(gamma, x) for test triples."""
    for gamma, x in family.loss_test_pairs():
        base = spec(gamma, x)
        for g in family.group_elements():
            moved = spec(family.act_param(g, gamma), family.act_action(g, x))
            if not _close(moved, base):
                raise PreconditionError(
                    f"{spec.kind} loss is not invariant at group element {g!r}",
                    violation=(g, _jsonable(gamma), _jsonable(x)))


def risk_identity_check(family, estimator, spec, rng, thetas=None, data_values=None,
                        n_reps=1_000_000, n_draws=None, candidates=()):
    """Compare frequentist and fiducial risks of an equivariant rule under an invariant loss.

    For a group acting transitively on the parameter space, the frequentist
    risk of an equivariant rule is constant in theta and equals its fiducial
    risk at every observed data value. Each risk is a Monte Carlo estimate on
    its own stream; the check passes when all pairs agree within three
    combined standard errors. ``candidates`` names further estimators whose
    frequentist risks are tabulated alongside, without entering the verdict.
    """
    spec = LossSpec(spec) if isinstance(spec, str) else spec
    name = estimator if isinstance(estimator, str) else getattr(estimator, "__name__", "estimator")
    est = family.estimator(estimator)
    check_invariance(family, spec)
    check_equivariance(family, est)

    thetas = list(family.default_thetas() if thetas is None else thetas)
    data_values = list(family.default_data_values() if data_values is None else data_values)
    if len(thetas) < 3 or len(data_values) < 3:
        raise DomainError("need at least three theta values and three data values")
    n_draws = n_reps if n_draws is None else n_draws
    streams = iter(task_streams(rng, len(thetas) + len(data_values)
                                + len(thetas) * len(candidates)))

    freq = {}
    for theta in thetas:
        freq[_key(theta)] = frequentist_risk(family.generate, est, spec, theta, n_reps,
                                             next(streams), parameter=family.parameter)
    fid = {}
    for value in data_values:
        datum = family.data_at(value)
        action = np.asarray(est(datum))[0]
        fid[_key(value)] = fiducial_risk(family.fiducial(datum), action, spec, n_draws,
                                         next(streams))

    estimates = list(freq.values()) + list(fid.values())
    worst = 0.0
    for i, a in enumerate(estimates):
        for b in estimates[i + 1:]:
            se = a.combined_se(b)
            gap = abs(a.mean - b.mean)
            worst = max(worst, gap / se if se > 0 else (0.0 if gap == 0 else math.inf))

    table = {}
    for cand in candidates:
        cest = family.estimator(cand)
        table[cand] = {_key(t): frequentist_risk(family.generate, cest, spec, t, n_reps,
                                                 next(streams), parameter=family.parameter)
                       for t in thetas}

    return RiskIdentityReport(family.name, name, spec.kind, freq, fid, worst <= AGREEMENT_SE,
                          float(worst), table)


def _key(value):
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else tuple(arr.ravel().tolist())


def risk_table(family, estimators, spec, thetas, n_reps, rng):
    """Frequentist risk rows ``(estimator, theta, RiskEstimate)`` on a theta grid."""
    spec = LossSpec(spec) if isinstance(spec, str) else spec
    streams = iter(task_streams(rng, len(estimators) * len(thetas)))
    rows = []
    for name in estimators:
        est = family.estimator(name)
        for theta in thetas:
            rows.append((name, theta, frequentist_risk(family.generate, est, spec, theta, n_reps,
                                                       next(streams), parameter=family.parameter)))
    return rows
