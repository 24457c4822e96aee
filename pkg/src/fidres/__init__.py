"""Fiducial distributions and fiducial-optimal decision rules.

Model modules (:mod:`fidres.corrfid`, :mod:`fidres.gamma_scale`,
:mod:`fidres.scaled_uniform`, :mod:`fidres.linpred`) expose the fiducial laws
directly; :mod:`fidres.estimators` wraps them as scikit-learn style objects and
:mod:`fidres.decision` provides risk evaluation and minimization.
"""

from .corrfid import CorrelationFiducial, Sample2D, empirical_correlation
from .decision import LossSpec, fiducial_risk, frequentist_risk, minimize_fiducial_risk
from .estimators import (
    CorrelationFiducialEstimator,
    FiducialLinearRegression,
    GammaScaleFiducial,
    ScaledUniformFiducial,
)
from .exceptions import (
    DomainError,
    EvaluationError,
    FidresError,
    InconsistentDataError,
    NumericError,
    PreconditionError,
    UndefinedActionError,
    UnsupportedModelError,
)
from .gamma_scale import GammaScaleModel
from .linpred import LinearModel
from .scaled_uniform import ScaledUniformData, TruncatedPareto
from .stochastics import RiskEstimate, RngStream

__version__ = "0.1.0"

__all__ = [
    "CorrelationFiducial", "CorrelationFiducialEstimator", "DomainError", "EvaluationError",
    "FiducialLinearRegression", "FidresError", "GammaScaleFiducial", "GammaScaleModel",
    "InconsistentDataError", "LinearModel", "LossSpec", "NumericError", "PreconditionError",
    "RiskEstimate", "RngStream", "Sample2D", "ScaledUniformData", "ScaledUniformFiducial",
    "TruncatedPareto", "UndefinedActionError", "UnsupportedModelError",
    "empirical_correlation", "fiducial_risk", "frequentist_risk", "minimize_fiducial_risk",
]
