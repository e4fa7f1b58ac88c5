"""Finite-shot derivative estimators and their bias / variance / MSE.

Estimators are linear in the sampled expectation values, so each one is a
:class:`~qderiv.shifts.ShiftPlan`.  Exact expectation values at the plan
points are computed once; every repetition then draws independent binomial
shot counts from its own ``(seed, stream)`` generator.

Closed-form theory (single element, valid while the single-shot variance
barely depends on the shift; see :func:`variance_spread`):

==================  ===============================================
param_shift(s)      sigma0^2 / (2 N sin^2 s)
scaled(lam, s)      lam^2 sigma0^2 / (2 N sin^2 s) + (1 - lam)^2 g^2
central(h)          sigma0^2 / (2 N h^2) + f3^2 h^4 / 36
forward(h)          2 sigma0^2 / (N h^2) + f2^2 h^2 / 4
==================  ===============================================

The forward variance uses two independent samples, ``[f(x+h) - f(x)] / h``,
hence ``2 sigma0^2 / (N h^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .derivatives import ExactEvaluator, derivative_tensor, ps_tensor
from .errors import SingularShiftError, UndefinedOptimumError, UnsupportedShiftError
from .shifts import HALF_PI, ShiftPlan, fd_plan, merge_plans, ps_plan
from .simulator import (
    Observable, ShotModel, expectation, make_rng, sample_means, single_shot_variance,
    variance_from_mean,
)

KINDS = ("param_shift", "scaled_param_shift", "central", "forward")


@dataclass(frozen=True)
class EstimatorSpec:
    """Derivative estimator: kind, step (``s`` or ``h``), scale and order."""

    kind: str
    step: float = HALF_PI
    lam: float | tuple = 1.0
    order: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.order not in (1, 2):
            raise ValueError("estimator order must be 1 or 2")
        if self.kind in ("param_shift", "scaled_param_shift"):
            if abs(math.sin(self.step)) < 1e-12:
                raise SingularShiftError(f"shift {self.step} is a multiple of pi")
        elif not self.step > 0:
            raise ValueError(f"finite-difference step must be positive, got {self.step}")
        if self.kind == "forward" and self.order != 1:
            raise UnsupportedShiftError("forward difference is only defined for order 1")
        lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        if np.any(lam < 0) or np.any(lam > 1):
            raise ValueError("scale factor must lie in [0, 1]")
        if not isinstance(self.lam, (int, float)):
            object.__setattr__(self, "lam", tuple(float(x) for x in lam))

    @classmethod
    def param_shift(cls, s: float = HALF_PI, order: int = 1) -> "EstimatorSpec":
        return cls("param_shift", s, 1.0, order)

    @classmethod
    def scaled(cls, lam, s: float = HALF_PI, order: int = 1) -> "EstimatorSpec":
        return cls("scaled_param_shift", s, lam, order)

    @classmethod
    def central(cls, h: float, order: int = 1) -> "EstimatorSpec":
        return cls("central", h, 1.0, order)

    @classmethod
    def forward(cls, h: float) -> "EstimatorSpec":
        return cls("forward", h, 1.0, 1)

    def plan(self, m: int, params=None) -> ShiftPlan:
        """Plan whose rows are the estimated entries.

        Order 1: one row per parameter.  Order 2: one row per ordered pair,
        row-major, so the result reshapes to a full symmetric matrix.  The
        second-order parameter-shift rule is used with its literal shift set
        (diagonal shifts of +-2s), without folding onto the pi/2 grid.
        """
        params = list(range(m)) if params is None else sorted(params)
        if self.order == 1:
            keys = [(j,) for j in params]
        else:
            keys = [tuple(sorted((j, k))) for j in params for k in params]
        if self.kind in ("param_shift", "scaled_param_shift"):
            entries = [ps_plan(k, m, self.step, reduce_pi=False) for k in keys]
        else:
            entries = [fd_plan(k, m, self.step, self.kind) for k in keys]
        plan = merge_plans(entries)
        if self.kind == "scaled_param_shift":
            lam = np.asarray(self.lam, dtype=float)
            if lam.ndim and lam.shape[0] != len(keys):
                raise ValueError(f"{lam.shape[0]} scale factors for {len(keys)} entries")
            plan = ShiftPlan(plan.offsets, plan.weights * np.reshape(lam, (-1, 1)))
        return plan

    @property
    def label(self) -> str:
        return self.kind if self.order == 1 else f"{self.kind}_hessian"


def _points_exact(circuit: Circuit, obs: Observable, points: np.ndarray) -> np.ndarray:
    return np.array([expectation(circuit, p, obs) for p in points], dtype=float)


def _shape_output(values: np.ndarray, order: int, k: int) -> np.ndarray:
    return values if order == 1 else values.reshape(k, k)


def estimate(spec: EstimatorSpec, circuit: Circuit, theta, obs: Observable,
             shots: ShotModel, params=None) -> np.ndarray:
    """One realisation of the estimator with fresh shots at every distinct point."""
    theta = np.asarray(theta, dtype=float)
    plan = spec.plan(theta.shape[0], params)
    exact = _points_exact(circuit, obs, plan.points(theta))
    sampled = sample_means(exact, obs, shots.shots, shots.rng())
    k = theta.shape[0] if params is None else len(params)
    return _shape_output(plan.combine(sampled), spec.order, k)


def estimate_gradient(spec: EstimatorSpec, circuit: Circuit, theta, obs: Observable,
                      shots: ShotModel, params=None) -> np.ndarray:
    if spec.order != 1:
        raise ValueError("estimate_gradient needs an order-1 estimator")
    return estimate(spec, circuit, theta, obs, shots, params)


def estimate_hessian(spec: EstimatorSpec, circuit: Circuit, theta, obs: Observable,
                     shots: ShotModel, params=None) -> np.ndarray:
    if spec.order != 2:
        raise ValueError("estimate_hessian needs an order-2 estimator")
    return estimate(spec, circuit, theta, obs, shots, params)


def exact_derivatives(circuit: Circuit, theta, obs: Observable, order: int, params=None) -> np.ndarray:
    """Ground truth from the exact parameter-shift rule, flattened like ``EstimatorSpec.plan``."""
    theta = np.asarray(theta, dtype=float)
    tensor = derivative_tensor(ExactEvaluator(circuit, obs), theta, order, params=params)
    params = list(range(theta.shape[0])) if params is None else sorted(params)
    if order == 1:
        return np.array([tensor[j] for j in params])
    return np.array([tensor[j, k] for j in params for k in params])


# ---------------------------------------------------------------------------
# closed-form theory

@dataclass(frozen=True)
class TheoryInputs:
    """Per-element (or array) inputs to the closed-form MSE expressions."""

    sigma0_sq: float | np.ndarray
    shots: int
    g: float | np.ndarray = 0.0
    f2: float | np.ndarray = 0.0
    f3: float | np.ndarray = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.sigma0_sq) < 0):
            raise ValueError("single-shot variance must be non-negative")
        if self.shots < 1:
            raise ValueError("shot count must be >= 1")


def theory_mse(spec: EstimatorSpec, inputs: TheoryInputs):
    """Closed-form single-element MSE (elementwise for array inputs)."""
    if spec.order != 1:
        raise UnsupportedShiftError("closed-form MSE is only provided for gradients")
    s0, n = np.asarray(inputs.sigma0_sq, dtype=float), inputs.shots
    step = spec.step
    if spec.kind == "param_shift":
        out = s0 / (2 * n * math.sin(step) ** 2)
    elif spec.kind == "scaled_param_shift":
        lam = np.asarray(spec.lam, dtype=float)
        out = lam ** 2 * s0 / (2 * n * math.sin(step) ** 2) + (1 - lam) ** 2 * np.asarray(inputs.g) ** 2
    elif spec.kind == "central":
        out = s0 / (2 * n * step ** 2) + np.asarray(inputs.f3) ** 2 * step ** 4 / 36
    else:
        out = 2 * s0 / (n * step ** 2) + np.asarray(inputs.f2) ** 2 * step ** 2 / 4
    return float(out) if np.ndim(out) == 0 else out


def optimal_step(scheme: str, inputs: TheoryInputs) -> float:
    """Step minimising the closed-form (total) MSE.

    Array inputs are summed over elements, i.e. the optimum of the total
    MSE for a single step shared by all gradient components.
    """
    if scheme == "param_shift":
        return HALF_PI
    s0 = float(np.sum(inputs.sigma0_sq) if np.ndim(inputs.sigma0_sq) else inputs.sigma0_sq)
    if scheme == "central":
        c = float(np.sum(np.square(inputs.f3)))
        if c == 0:
            raise UndefinedOptimumError("central optimum needs a non-zero third derivative")
        return (9 * s0 / (c * inputs.shots)) ** (1 / 6)
    if scheme == "forward":
        c = float(np.sum(np.square(inputs.f2)))
        if c == 0:
            raise UndefinedOptimumError("forward optimum needs a non-zero second derivative")
        return (8 * s0 / (c * inputs.shots)) ** (1 / 4)
    raise ValueError(f"unknown scheme {scheme!r}")


def optimal_mse(scheme: str, inputs: TheoryInputs) -> float:
    """Closed-form total MSE at :func:`optimal_step`."""
    s0 = float(np.sum(inputs.sigma0_sq))
    n = inputs.shots
    if scheme == "param_shift":
        return s0 / (2 * n)
    if scheme == "central":
        c = float(np.sum(np.square(inputs.f3)))
        return 1.5 * (s0 / (2 * n)) ** (2 / 3) * (c / 18) ** (1 / 3)
    if scheme == "forward":
        c = float(np.sum(np.square(inputs.f2)))
        return math.sqrt(2 * s0 * c / n)
    raise ValueError(f"unknown scheme {scheme!r}")


def lambda_star(g, var):
    """Optimal scale ``1 / (1 + var / g^2)`` (elementwise)."""
    g2 = np.square(np.asarray(g, dtype=float))
    var = np.asarray(var, dtype=float)
    if np.any((g2 == 0) & (var == 0)):
        raise UndefinedOptimumError("lambda* undefined when gradient and variance both vanish")
    out = g2 / (g2 + var)
    return float(out) if out.ndim == 0 else out


def plugin_lambda_star(g_hat, f_plus, f_minus, obs: Observable, shots: int, s: float = HALF_PI):
    """Estimated lambda* from one parameter-shift realisation.

    The variance is the plug-in ``[sigma0^2(f+) + sigma0^2(f-)] / (4 N sin^2 s)``.
    No dominance guarantee holds for this estimate.
    """
    var = (variance_from_mean(np.asarray(f_plus), obs) + variance_from_mean(np.asarray(f_minus), obs))
    var = var / (4 * shots * math.sin(s) ** 2)
    g2 = np.square(g_hat)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(g2 + var > 0, g2 / (g2 + var), 1.0)


def third_derivative(circuit: Circuit, theta, obs: Observable, j: int) -> float:
    """``d^3 f / d theta_j^3`` (equals ``-g_j`` for rotation gates)."""
    return ps_tensor(ExactEvaluator(circuit, obs), theta, (j, j, j))


def ps_variance(circuit: Circuit, theta, obs: Observable, shots: int, s: float = HALF_PI, params=None):
    """Exact variance of each parameter-shift gradient component."""
    theta = np.asarray(theta, dtype=float)
    params = range(theta.shape[0]) if params is None else sorted(params)
    out = []
    for j in params:
        e = np.zeros_like(theta)
        e[j] = s
        v = single_shot_variance(circuit, theta + e, obs) + single_shot_variance(circuit, theta - e, obs)
        out.append(v / (4 * shots * math.sin(s) ** 2))
    return np.array(out)


def optimal_lambda(circuit: Circuit, theta, obs: Observable, shots: int, s: float = HALF_PI, params=None):
    """Exact (oracle) lambda* per gradient component."""
    g = exact_derivatives(circuit, theta, obs, 1, params)
    return lambda_star(g, ps_variance(circuit, theta, obs, shots, s, params))


def theory_inputs(circuit: Circuit, theta, obs: Observable, shots: int, params=None) -> TheoryInputs:
    """Exact per-parameter inputs at ``theta`` (sigma0^2 taken at ``theta``)."""
    theta = np.asarray(theta, dtype=float)
    params = list(range(theta.shape[0])) if params is None else sorted(params)
    ev = ExactEvaluator(circuit, obs)
    s0 = single_shot_variance(circuit, theta, obs)
    return TheoryInputs(
        sigma0_sq=np.full(len(params), s0),
        shots=shots,
        g=np.array([ps_tensor(ev, theta, (j,)) for j in params]),
        f2=np.array([ps_tensor(ev, theta, (j, j)) for j in params]),
        f3=np.array([ps_tensor(ev, theta, (j, j, j)) for j in params]),
    )


def variance_spread(circuit: Circuit, theta, obs: Observable, xs, params=None) -> float:
    """Largest relative deviation of ``sigma0^2(theta+x e_j) + sigma0^2(theta-x e_j)`` from ``2 sigma0^2(theta)``."""
    theta = np.asarray(theta, dtype=float)
    params = range(theta.shape[0]) if params is None else sorted(params)
    base = 2 * single_shot_variance(circuit, theta, obs)
    worst = 0.0
    for j in params:
        for x in np.atleast_1d(xs):
            e = np.zeros_like(theta)
            e[j] = x
            tot = single_shot_variance(circuit, theta + e, obs) + single_shot_variance(circuit, theta - e, obs)
            dev = abs(tot - base)
            worst = max(worst, np.inf if base == 0 and dev > 0 else (dev / base if base else 0.0))
    return float(worst)


# ---------------------------------------------------------------------------
# empirical reports

@dataclass
class EstimatorReport:
    spec: EstimatorSpec
    shots: int
    repetitions: int
    seed: int
    stream: int
    truth: np.ndarray
    mean: np.ndarray
    bias: np.ndarray
    variance: np.ndarray
    mse: np.ndarray
    total_mse: float
    total_mse_se: float
    total_sq_err_sd: float
    predicted_mse: float
    theory_total_mse: float | None
    variance_spread: float
    tolerance: float
    batch_mse: np.ndarray = field(repr=False, default=None)

    @property
    def theory_valid(self) -> bool:
        return self.theory_total_mse is not None and self.variance_spread <= 0.1

    def decomposition_gap(self) -> float:
        """``|MSE - (Var + Bias^2)|`` summed over elements."""
        return float(np.sum(np.abs(self.mse - (self.variance + self.bias ** 2))))

    def decomposition_holds(self) -> bool:
        return self.decomposition_gap() <= self.tolerance


def sample_estimates(spec: EstimatorSpec, circuit: Circuit, theta, obs: Observable, shots: int,
                     repetitions: int, seed: int, stream: int = 0, params=None,
                     exact_points=None) -> np.ndarray:
    """``repetitions`` independent realisations; repetition ``r`` uses stream ``stream + r``."""
    theta = np.asarray(theta, dtype=float)
    plan = spec.plan(theta.shape[0], params)
    exact = _points_exact(circuit, obs, plan.points(theta)) if exact_points is None else exact_points
    out = np.empty((repetitions, plan.weights.shape[0]))
    for r in range(repetitions):
        rng = make_rng(seed, stream + r)
        out[r] = plan.combine(sample_means(exact, obs, shots, rng))
    return out


def empirical_report(spec: EstimatorSpec, circuit: Circuit, theta, obs: Observable, shots: int,
                     repetitions: int, seed: int, stream: int = 0, params=None,
                     batches: int = 10, truth=None) -> EstimatorReport:
    """Bias, variance and MSE of ``spec`` over independent repetitions."""
    if repetitions < 2:
        raise ValueError("need at least 2 repetitions")
    theta = np.asarray(theta, dtype=float)
    plan = spec.plan(theta.shape[0], params)
    exact_pts = _points_exact(circuit, obs, plan.points(theta))
    if truth is None:
        truth = exact_derivatives(circuit, theta, obs, spec.order, params)
    truth = np.asarray(truth, dtype=float)
    est = sample_estimates(spec, circuit, theta, obs, shots, repetitions, seed, stream, params, exact_pts)

    sq = (est - truth) ** 2
    mean = est.mean(axis=0)
    mse = sq.mean(axis=0)
    total_per_rep = sq.sum(axis=1)
    nb = max(2, min(batches, repetitions))
    batch_mse = np.array([total_per_rep[idx].mean() for idx in np.array_split(np.arange(repetitions), nb)])

    # prediction from the plan: exact bias plus independent binomial noise per point
    pred_bias = plan.combine(exact_pts) - truth
    pred_var = (plan.weights ** 2) @ variance_from_mean(exact_pts, obs) / shots
    theory = None
    if spec.order == 1:
        theory = float(np.sum(theory_mse(spec, theory_inputs(circuit, theta, obs, shots, params))))
    total = float(mse.sum())
    return EstimatorReport(
        spec=spec, shots=shots, repetitions=repetitions, seed=seed, stream=stream,
        truth=truth, mean=mean, bias=mean - truth, variance=est.var(axis=0), mse=mse,
        total_mse=total,
        total_mse_se=float(batch_mse.std(ddof=1) / math.sqrt(nb)),
        total_sq_err_sd=float(total_per_rep.std()),
        predicted_mse=float(np.sum(pred_bias ** 2 + pred_var)),
        theory_total_mse=theory,
        variance_spread=variance_spread(circuit, theta, obs, spec.step * spec.order, params),
        tolerance=1e-9 * max(total, 1e-300) + 1e-15,
        batch_mse=batch_mse,
    )
