"""Frequentist calibration of fiducial distributions.

For an exact confidence distribution the fiducial CDF evaluated at the true
parameter is Uniform(0, 1) over repeated sampling, so the one-sided set
``{gamma <= q_p}`` covers the truth with probability exactly ``p``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, EvaluationError
from .stochastics import as_generator, ks_pvalue, ks_statistic

LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)
KS_LEVEL = 0.01
COVERAGE_BAND = 0.03


@dataclass
class CoverageSummary:
    model: str
    theta: float
    reps: int
    levels: tuple
    coverage: dict
    ks_statistic: float
    ks_pvalue: float

    @property
    def ks_passed(self):
        return self.ks_pvalue >= KS_LEVEL

    @property
    def bands_passed(self):
        return all(abs(self.coverage[p] - p) <= COVERAGE_BAND for p in self.levels)

    @property
    def passed(self):
        return self.ks_passed and self.bands_passed

    def to_dict(self):
        return {
            "model": self.model,
            "theta": self.theta,
            "reps": self.reps,
            "coverage": {f"{p:g}": self.coverage[p] for p in self.levels},
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
            "ks_passed": self.ks_passed,
            "bands_passed": self.bands_passed,
            "passed": self.passed,
        }


def pivot_values(family, theta, reps, rng):
    """Fiducial CDF at the truth for ``reps`` independently generated datasets."""
    gen = as_generator(rng)
    batch = family.generate(theta, gen, int(reps))
    values = np.asarray(family.fiducial_cdf_at(batch, theta), dtype=float)
    bad = ~np.isfinite(values)
    if np.count_nonzero(bad) > 1e-3 * values.size:
        raise EvaluationError(f"fiducial CDF failed on {np.count_nonzero(bad)} replications")
    return values[~bad]


def coverage(family, theta, reps, rng, levels=LEVELS):
    """Empirical one-sided coverage and KS uniformity of the fiducial CDF at ``theta``."""
    if reps < 500:
        raise DomainError("coverage needs at least 500 replications")
    values = pivot_values(family, theta, reps, rng)
    cov = {p: float(np.mean(values <= p)) for p in levels}
    stat = ks_statistic(values, lambda x: np.clip(x, 0.0, 1.0))
    return CoverageSummary(family.name, float(theta), int(values.size), tuple(levels), cov,
                           stat, ks_pvalue(stat, values.size))
