"""Exact and sampled derivative tensors of circuit expectation values."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, overlap_circuit
from .errors import SingularShiftError, UnsupportedShiftError
from .shifts import HALF_PI, ShiftPlan, fd_plan, merge_plans, ps_plan
from .simulator import (
    Observable, ShotModel, ZeroProjector, expectation, run_circuit, sample_means,
)


class ExactEvaluator:
    """``theta -> f(theta)`` from the exact simulator."""

    def __init__(self, circuit: Circuit, observable: Observable):
        self.circuit = circuit
        self.observable = observable
        self.calls = 0

    def __call__(self, theta) -> float:
        self.calls += 1
        return expectation(self.circuit, theta, self.observable)

    def values(self, points) -> np.ndarray:
        return np.array([self(p) for p in np.atleast_2d(points)], dtype=float)


class SampledEvaluator(ExactEvaluator):
    """``theta -> f_hat(theta)``; every call consumes a fresh stream id."""

    def __init__(self, circuit: Circuit, observable: Observable, shots: ShotModel):
        super().__init__(circuit, observable)
        self.shots = shots
        self.next_stream = shots.stream

    def exact(self, theta) -> float:
        return expectation(self.circuit, theta, self.observable)

    def __call__(self, theta) -> float:
        self.calls += 1
        rng = self.shots.with_stream(self.next_stream).rng()
        self.next_stream += 1
        return float(sample_means(self.exact(theta), self.observable, self.shots.shots, rng))


def overlap_evaluator(circuit: Circuit, reference, shots: ShotModel | None = None) -> ExactEvaluator:
    """Evaluator of ``|<psi(reference)|psi(theta)>|^2`` (all-zeros probability)."""
    composite = overlap_circuit(circuit, reference)
    if shots is None:
        return ExactEvaluator(composite, ZeroProjector())
    return SampledEvaluator(composite, ZeroProjector(), shots)


def evaluate_plan(ev: ExactEvaluator, theta, plan: ShiftPlan) -> np.ndarray:
    """Evaluate every distinct point of ``plan`` once and combine."""
    if plan.n_points == 0:
        return np.zeros(plan.weights.shape[0])
    return plan.combine(ev.values(plan.points(theta)))


@dataclass
class DerivativeTensor:
    """Symmetric order-``d`` tensor stored by sorted index multiset."""

    order: int
    m: int
    entries: dict = field(default_factory=dict)
    evaluations: int = 0

    def __getitem__(self, indices) -> float:
        if isinstance(indices, (int, np.integer)):
            indices = (indices,)
        return self.entries[tuple(sorted(int(j) for j in indices))]

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.m,) * self.order)
        for idx in itertools.product(range(self.m), repeat=self.order):
            key = tuple(sorted(idx))
            if key in self.entries:
                out[idx] = self.entries[key]
        return out


def ps_tensor(ev: ExactEvaluator, theta, indices, s: float = HALF_PI, reduce_pi: bool = True) -> float:
    """One entry ``d^d f / d theta_j1 ... d theta_jd`` by the parameter-shift rule."""
    theta = np.asarray(theta, dtype=float)
    plan = ps_plan(indices, theta.shape[0], s, reduce_pi)
    return float(evaluate_plan(ev, theta, plan)[0])


def ps_hessian_diag(ev: ExactEvaluator, theta, j: int, variant: str = "two-eval") -> float:
    """Diagonal Hessian entry from two (pi shift) or three (+-pi/2 and 0) evaluations."""
    theta = np.asarray(theta, dtype=float)
    e = np.zeros_like(theta)
    e[j] = 1.0
    if variant == "two-eval":
        return (ev(theta + np.pi * e) - ev(theta)) / 2
    if variant == "three-eval":
        return (ev(theta + HALF_PI * e) - 2 * ev(theta) + ev(theta - HALF_PI * e)) / 2
    raise ValueError(f"unknown variant {variant!r}")


def fd_tensor(ev: ExactEvaluator, theta, indices, h: float, scheme: str = "central") -> float:
    theta = np.asarray(theta, dtype=float)
    plan = fd_plan(indices, theta.shape[0], h, scheme)
    return float(evaluate_plan(ev, theta, plan)[0])


def tensor_entries(m: int, order: int, params=None) -> list[tuple[int, ...]]:
    """Canonical entry ordering: sorted multisets over ``params`` (default all)."""
    params = range(m) if params is None else sorted(params)
    return list(itertools.combinations_with_replacement(params, order))


def derivative_tensor(ev: ExactEvaluator, theta, order: int, s: float = HALF_PI,
                      params=None, reduce_pi: bool = True) -> DerivativeTensor:
    """All distinct entries of the order-``d`` tensor from one shared plan."""
    theta = np.asarray(theta, dtype=float)
    m = theta.shape[0]
    keys = tensor_entries(m, order, params)
    plan = merge_plans(ps_plan(k, m, s, reduce_pi) for k in keys)
    values = evaluate_plan(ev, theta, plan)
    return DerivativeTensor(order, m, dict(zip(keys, values.tolist())), plan.n_points)


def gradient(ev: ExactEvaluator, theta, s: float = HALF_PI) -> np.ndarray:
    return derivative_tensor(ev, theta, 1, s).to_array()


def hessian(ev: ExactEvaluator, theta, s: float = HALF_PI) -> np.ndarray:
    return derivative_tensor(ev, theta, 2, s).to_array()


def metric_plan(m: int, diagonal: str = "two-eval", params=None) -> ShiftPlan:
    """Overlap-probability plan for the metric tensor entries (canonical order).

    Off-diagonal entries are -1/2 times the pi/2 Hessian of the overlap.  The
    diagonal uses ``[1 - P(pi e_j)]/4`` ("two-eval") or ``[1 - P(pi/2 e_j)]/2``
    ("half-pi").  The constant self-overlap term is exact and added by
    :func:`metric_tensor`, so it is never sampled.
    """
    plans = []
    for j, k in tensor_entries(m, 2, params):
        if j != k:
            p = ps_plan((j, k), m, HALF_PI, reduce_pi=False)
            plans.append(ShiftPlan(p.offsets, -0.5 * p.weights))
            continue
        off = np.zeros((1, m))
        if diagonal == "two-eval":
            off[0, j] = np.pi
            plans.append(ShiftPlan(off, np.array([[-0.25]])))
        elif diagonal == "half-pi":
            off[0, j] = HALF_PI
            plans.append(ShiftPlan(off, np.array([[-0.5]])))
        else:
            raise ValueError(f"unknown diagonal variant {diagonal!r}")
    return merge_plans(plans)


def metric_tensor(circuit: Circuit, theta, shots: ShotModel | None = None,
                  diagonal: str = "two-eval", params=None) -> DerivativeTensor:
    """Fubini-Study metric tensor from overlap probabilities.

    With ``shots`` each distinct overlap is estimated from the all-zeros
    frequency of the composite circuit, using one stream for the whole build.
    """
    theta = np.asarray(theta, dtype=float)
    m = theta.shape[0]
    keys = tensor_entries(m, 2, params)
    plan = metric_plan(m, diagonal, params)
    ref = run_circuit(circuit, theta).amplitudes
    exact = np.array([
        abs(np.vdot(ref, run_circuit(circuit, p).amplitudes)) ** 2 for p in plan.points(theta)
    ])
    if shots is not None:
        exact = sample_means(exact, ZeroProjector(), shots.shots, shots.rng())
    values = plan.combine(exact)
    const = {"two-eval": 0.25, "half-pi": 0.5}[diagonal]
    entries = {}
    for row, key in enumerate(keys):
        entries[key] = float(values[row] + (const if key[0] == key[1] else 0.0))
    return DerivativeTensor(2, m, entries, plan.n_points)


def pi_shift_identity_check(ev: ExactEvaluator, theta, j: int) -> tuple[float, float]:
    """``f(theta + pi e_j)`` and ``f(theta + pi/2 e_j) + f(theta - pi/2 e_j) - f(theta)``."""
    theta = np.asarray(theta, dtype=float)
    e = np.zeros_like(theta)
    e[j] = 1.0
    lhs = ev(theta + np.pi * e)
    rhs = ev(theta + HALF_PI * e) + ev(theta - HALF_PI * e) - ev(theta)
    return lhs, rhs


__all__ = [
    "ExactEvaluator", "SampledEvaluator", "overlap_evaluator", "evaluate_plan",
    "DerivativeTensor", "ps_tensor", "ps_hessian_diag", "fd_tensor", "tensor_entries",
    "derivative_tensor", "gradient", "hessian", "metric_plan", "metric_tensor",
    "pi_shift_identity_check", "SingularShiftError", "UnsupportedShiftError",
]
