"""Frenet geometry of curves in coordinate charts, torse-forming fields, slant helices and torqued curves."""

from .curvegeo import (
    CurveError,
    CurveSamples,
    FrenetData,
    FrenetOrderError,
    curve_from_expressions,
    curve_from_points,
    detect_special,
    frenet_apparatus,
    reparametrize_arclength,
)
from .fields import FieldError, FieldSpec, builtin_field, classify_field, field_from_samples, torse_forming_fit
from .manifold import ChartMetric, DomainError, MetricError, builtin_metric, christoffel, christoffel_batch, inner
from .slant import angle_function, classify_euclidean_slant, ratio_law_check, slant_report, system_residuals_anti
from .synthesis import (
    DegenerateCurveError,
    SynthesisConfig,
    SynthesisError,
    builtin_curve,
    frenet_integrate,
    synthesize_concircular,
    synthesize_slant_from_phi,
)
from .torqued import PreconditionError, concircular_ode_residual, system_residuals_torqued, torqued_report

__version__ = "0.1.0"

__all__ = [
    "ChartMetric", "CurveError", "CurveSamples", "DegenerateCurveError", "DomainError", "FieldError", "FieldSpec",
    "FrenetData", "FrenetOrderError", "MetricError", "PreconditionError", "SynthesisConfig", "SynthesisError",
    "angle_function", "builtin_curve", "builtin_field", "builtin_metric", "christoffel", "christoffel_batch",
    "classify_euclidean_slant", "classify_field", "concircular_ode_residual", "curve_from_expressions",
    "curve_from_points", "detect_special", "field_from_samples", "frenet_apparatus", "frenet_integrate", "inner",
    "ratio_law_check", "reparametrize_arclength", "slant_report", "synthesize_concircular",
    "synthesize_slant_from_phi", "system_residuals_anti", "system_residuals_torqued", "torqued_report",
    "torse_forming_fit",
]
