"""Quantile and follow-the-leader particle solvers for nonlocal conservation laws
with a look-ahead kernel, plus checks of their smoothing and stability estimates."""

__version__ = "0.1.0"

from .measure import (CdfView, DegenerateGap, Measure1D, MeasureError, QuantileGrid, cdf_of,
                      quantile_function, quantile_of, reconstruct_density, wasserstein)
from .model import (KernelSpec, ModelSpec, VelocitySpec, builtin_model, discrete_smoothing_bound,
                    gap_bound, smoothing_bound, stability_constant, support_bound,
                    tabulated_kernel, threshold_density)
from .dynamics import (OrderViolation, RhsMode, StepRejected, Trajectory, VelocityFieldSample,
                       equivalence_check, integrate, rhs, velocity_field)
from .oracle import RAREFACTION, SHOCK, RiemannSolution, exact_indicator_particles, rarefaction, shock
from .verify import (BoundReport, ResolutionError, TestBump, check_gap, check_max_principle,
                     check_smoothing, check_stability, check_support, convergence_study,
                     space_time_residual, weak_residual, weak_residuals)

__all__ = [
    "CdfView", "DegenerateGap", "Measure1D", "MeasureError", "QuantileGrid", "cdf_of",
    "quantile_function", "quantile_of", "reconstruct_density", "wasserstein", "KernelSpec",
    "ModelSpec", "VelocitySpec", "builtin_model", "discrete_smoothing_bound", "gap_bound",
    "smoothing_bound", "stability_constant", "support_bound", "tabulated_kernel",
    "threshold_density", "OrderViolation", "RhsMode", "StepRejected", "Trajectory",
    "VelocityFieldSample", "equivalence_check", "integrate", "rhs", "velocity_field",
    "RAREFACTION", "SHOCK", "RiemannSolution", "exact_indicator_particles", "rarefaction",
    "shock", "BoundReport", "ResolutionError", "TestBump", "check_gap", "check_max_principle",
    "check_smoothing", "check_stability", "check_support", "convergence_study",
    "space_time_residual", "weak_residual", "weak_residuals",
]
