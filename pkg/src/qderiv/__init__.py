"""Parameter-shift derivatives, shot-noise estimator statistics and optimizers
for variational circuits on a dense statevector simulator."""
from __future__ import annotations

from .circuit import (
    CNOT, Circuit, FixedRotation, Hadamard, PauliString, Rotation, Unitary, load_circuit,
    random_circuit, rx, ry, rz, save_circuit,
)
from .derivatives import (
    DerivativeTensor, ExactEvaluator, SampledEvaluator, derivative_tensor, fd_tensor, gradient,
    hessian, metric_tensor, ps_hessian_diag, ps_tensor,
)
from .errors import (
    NonPositiveSpectrumError, ParameterCountError, ShotCountError, SingularMatrixError,
    SingularShiftError, UndefinedOptimumError, UnsupportedShiftError,
)
from .estimators import (
    EstimatorReport, EstimatorSpec, TheoryInputs, empirical_report, estimate_gradient,
    estimate_hessian, lambda_star, optimal_step, theory_mse, third_derivative,
)
from .optimizers import OptimizerConfig, OptimizerTrace, optimize, regularize, step
from .reconstruct import TrigSurrogate, trig_reconstruct
from .shifts import ShiftPlan, eval_count, fd_plan, ps_plan, shift_set
from .simulator import (
    ShotModel, SinglePauli, StateVector, ZeroProjector, expectation, run_circuit,
    sample_expectation,
)

__version__ = "0.1.0"

__all__ = [
    "CNOT", "Circuit", "FixedRotation", "Hadamard", "PauliString", "Rotation", "Unitary",
    "load_circuit", "random_circuit", "rx", "ry", "rz", "save_circuit", "DerivativeTensor",
    "ExactEvaluator", "SampledEvaluator", "derivative_tensor", "fd_tensor", "gradient", "hessian",
    "metric_tensor", "ps_hessian_diag", "ps_tensor", "NonPositiveSpectrumError",
    "ParameterCountError", "ShotCountError", "SingularMatrixError", "SingularShiftError",
    "UndefinedOptimumError", "UnsupportedShiftError", "EstimatorReport", "EstimatorSpec",
    "TheoryInputs", "empirical_report", "estimate_gradient", "estimate_hessian", "lambda_star",
    "optimal_step", "theory_mse", "third_derivative", "OptimizerConfig", "OptimizerTrace",
    "optimize", "regularize", "step", "TrigSurrogate", "trig_reconstruct", "ShiftPlan",
    "eval_count", "fd_plan", "ps_plan", "shift_set", "ShotModel", "SinglePauli", "StateVector",
    "ZeroProjector", "expectation", "run_circuit", "sample_expectation",
]
