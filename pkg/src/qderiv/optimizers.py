"""Gradient descent, Newton, diagonal Newton and natural-gradient optimizers.

Each iteration builds one merged :class:`~qderiv.shifts.ShiftPlan` holding
the gradient rows and, for the matrix methods, the curvature rows.  Shared
points are evaluated once.  With the default pi/2 rule and two trainable
parameters this gives 4 evaluations per GD step, 5 per diagonal-Newton step
(the gradient pairs plus the unshifted point feed the three-point diagonal)
and 9 per Newton step (the full 3x3 grid).  The natural-gradient method adds
the distinct overlap circuits of the metric tensor.

The cost recorded for monitoring (sampled at the new parameters) is not
counted as a circuit evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .derivatives import metric_tensor, tensor_entries
from .errors import NonPositiveSpectrumError, SingularMatrixError
from .estimators import EstimatorSpec
from .shifts import ShiftPlan, merge_plans, ps_plan
from .simulator import Observable, ShotModel, expectation, make_rng, sample_means

METHODS = ("GD", "Newton", "DiagNewton", "QNG")
REGULARIZERS = ("shift", "clamp", "max-eig")


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "GD"
    eta: float = 0.4
    regularizer: str = "clamp"
    eps: float = 1e-3
    gradient: EstimatorSpec = field(default_factory=EstimatorSpec.param_shift)
    shots: int | None = None  # None: exact expectation values
    exact_matrix: bool = False  # curvature from the exact simulator even when sampling
    seed: int = 0
    stream: int = 0
    max_iter: int = 100
    trainable: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.regularizer not in REGULARIZERS:
            raise ValueError(f"unknown regularizer {self.regularizer!r}")
        if self.eta < 0:
            raise ValueError("learning rate must be non-negative")
        if self.regularizer != "max-eig" and not self.eps > 0:
            raise ValueError("regularization epsilon must be positive")
        if self.gradient.order != 1:
            raise ValueError("gradient estimator must be first order")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shot count must be >= 1")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")
        if self.trainable is not None:
            object.__setattr__(self, "trainable", tuple(sorted(int(j) for j in self.trainable)))


def regularize(matrix, method: str = "clamp", eps: float = 1e-3) -> np.ndarray:
    """Make a symmetric curvature matrix safely positive.

    ``shift`` adds ``eps`` to every eigenvalue, ``clamp`` replaces each
    eigenvalue by ``max(lambda, eps)`` keeping the eigenvectors, and
    ``max-eig`` returns ``lambda_max * I``.
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-8:
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    if method == "shift":
        return a + eps * np.eye(a.shape[0])
    vals, vecs = np.linalg.eigh(a)
    if method == "clamp":
        if np.all(vals >= eps):
            return a
        return (vecs * np.maximum(vals, eps)) @ vecs.T
    if method == "max-eig":
        if vals[-1] <= 0:
            raise NonPositiveSpectrumError(f"largest eigenvalue {vals[-1]:.3g} is not positive")
        return vals[-1] * np.eye(a.shape[0])
    raise ValueError(f"unknown regularizer {method!r}")


def step(config: OptimizerConfig, theta, gradient, matrix=None) -> np.ndarray:
    """One update; ``gradient`` and ``matrix`` are over the trainable indices.

    ``matrix`` must already be regularized (for DiagNewton only its diagonal is used).
    """
    theta = np.array(theta, dtype=float)
    idx = list(range(theta.shape[0])) if config.trainable is None else list(config.trainable)
    g = np.asarray(gradient, dtype=float)
    if g.shape != (len(idx),):
        raise ValueError(f"gradient has shape {g.shape}, expected ({len(idx)},)")
    if config.method == "GD":
        delta = g
    else:
        if matrix is None:
            raise ValueError(f"{config.method} needs a curvature matrix")
        a = np.atleast_2d(np.asarray(matrix, dtype=float))
        if config.method == "DiagNewton":
            diag = np.diag(a)
            if np.any(diag == 0):
                raise SingularMatrixError("zero diagonal entry after regularization")
            delta = g / diag
        else:
            try:
                delta = np.linalg.solve(a, g)
            except np.linalg.LinAlgError as exc:
                raise SingularMatrixError("curvature matrix is singular") from exc
    theta[idx] -= config.eta * delta
    return theta


@dataclass(frozen=True, eq=False)
class TraceRecord:
    iteration: int
    theta: np.ndarray
    cost: float  # estimated (equals exact_cost without shots)
    exact_cost: float
    evaluations: int
    gradient: np.ndarray | None = None
    matrix: np.ndarray | None = None


@dataclass
class OptimizerTrace:
    config: OptimizerConfig
    records: list[TraceRecord] = field(default_factory=list)

    def costs(self, exact: bool = True) -> np.ndarray:
        return np.array([r.exact_cost if exact else r.cost for r in self.records])

    def evaluations(self) -> np.ndarray:
        return np.array([r.evaluations for r in self.records])

    @property
    def final_theta(self) -> np.ndarray:
        return self.records[-1].theta

    def evaluations_to_reach(self, threshold: float) -> int | None:
        """Cumulative evaluations at the first record with exact cost <= threshold."""
        for r in self.records:
            if r.exact_cost <= threshold:
                return r.evaluations
        return None


def _matrix_keys(method: str, idx) -> list[tuple[int, int]]:
    if method == "Newton":
        return tensor_entries(0, 2, idx)
    if method == "DiagNewton":
        return [(j, j) for j in idx]
    return []


def step_plan(config: OptimizerConfig, m: int) -> tuple[ShiftPlan, list]:
    """Merged plan: gradient rows first, then one row per Hessian key."""
    idx = list(range(m)) if config.trainable is None else list(config.trainable)
    grad = config.gradient.plan(m, idx)
    keys = _matrix_keys(config.method, idx)
    plans = [grad] + [ps_plan(k, m) for k in keys]
    return merge_plans(plans), keys


def _assemble(keys, values, idx) -> np.ndarray:
    pos = {j: a for a, j in enumerate(idx)}
    out = np.zeros((len(idx), len(idx)))
    for (j, k), v in zip(keys, values):
        out[pos[j], pos[k]] = out[pos[k], pos[j]] = v
    return out


def optimize(config: OptimizerConfig, circuit: Circuit, obs: Observable, theta0) -> OptimizerTrace:
    """Run ``config.max_iter`` updates from ``theta0`` (fixed budget, no early exit).

    Iteration ``t`` draws shots from streams ``base+3t`` (derivatives),
    ``base+3t+1`` (metric overlaps) and ``base+3t+2`` (monitoring cost) of
    ``config.seed``, where ``base = config.stream``.
    """
    theta = np.array(theta0, dtype=float)
    m = circuit.n_params
    if theta.shape != (m,):
        raise ValueError(f"theta0 has shape {theta.shape}, circuit has {m} parameters")
    idx = list(range(m)) if config.trainable is None else list(config.trainable)
    plan, keys = step_plan(config, m)
    n_grad = len(idx)

    def monitor(t, th):
        exact = expectation(circuit, th, obs)
        if config.shots is None:
            return exact, exact
        rng = make_rng(config.seed, config.stream + 3 * t + 2)
        return float(sample_means(exact, obs, config.shots, rng)), exact

    trace = OptimizerTrace(config)
    cost, exact = monitor(0, theta)
    trace.records.append(TraceRecord(0, theta.copy(), cost, exact, 0))
    evals = 0
    for t in range(config.max_iter):
        exact_pts = np.array([expectation(circuit, p, obs) for p in plan.points(theta)])
        if config.shots is None:
            values = exact_pts
        else:
            values = sample_means(exact_pts, obs, config.shots, make_rng(config.seed, config.stream + 3 * t))
        rows = plan.combine(values)
        evals += plan.n_points
        g = rows[:n_grad]
        matrix = None
        if keys:
            if config.shots is not None and config.exact_matrix:
                rows = plan.combine(exact_pts)
            matrix = _assemble(keys, rows[n_grad:], idx)
        elif config.method == "QNG":
            shots = None
            if config.shots is not None and not config.exact_matrix:
                shots = ShotModel(config.shots, config.seed, config.stream + 3 * t + 1)
            metric = metric_tensor(circuit, theta, shots, params=idx)
            evals += metric.evaluations
            matrix = _assemble(list(metric.entries), list(metric.entries.values()), idx)
        if matrix is not None:
            if config.method == "DiagNewton":
                matrix = np.diag(regularize(np.diag(np.diag(matrix)), config.regularizer, config.eps).diagonal())
            else:
                matrix = regularize(matrix, config.regularizer, config.eps)
        theta = step(config, theta, g, matrix)
        cost, exact = monitor(t + 1, theta)
        trace.records.append(TraceRecord(t + 1, theta.copy(), cost, exact, evals, g, matrix))
    return trace
