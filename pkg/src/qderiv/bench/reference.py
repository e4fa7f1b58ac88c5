"""The five-qubit benchmark circuit and its calibration against known values.

The circuit is one X rotation per wire followed by CNOTs on the T-shaped
coupling graph ``{(0,1), (1,2), (1,3), (3,4)}``; the observable is Z on
wire 1.  The gate direction and order on each edge are not pinned down by
the device topology alone, so :func:`calibrate` scans both edge orders and
all sixteen orientation patterns (32 candidates, default first) and keeps
the first one reproducing the known cost, gradient and Hessian at
``REFERENCE_ANGLES``.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from ..circuit import CNOT, Circuit, PauliString, rx
from ..derivatives import ExactEvaluator, derivative_tensor
from ..simulator import SinglePauli

N_WIRES = 5
EDGES = ((0, 1), (1, 2), (1, 3), (3, 4))
REFERENCE_ANGLES = np.array([2.739, 0.163, 3.454, 2.735, 2.641])
# frozen parameters and start point of the two-parameter optimisation benchmark
FROZEN = (3.454, 2.735, 2.641)
START = (0.1, 0.15)
MINIMUM = -0.874

GOLDEN_COST = -0.794
GOLDEN_GRADIENT = np.array([-0.338, 0.130, 0.256, -0.342, 0.0])
GOLDEN_HESSIAN = np.array([
    [0.794, 0.055, 0.109, -0.145, 0.0],
    [0.055, 0.794, -0.042, 0.056, 0.0],
    [0.109, -0.042, 0.794, 0.110, 0.0],
    [-0.145, 0.056, 0.110, 0.794, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0],
])
# The goldens are printed to 3 decimals at a parameter point that is itself
# rounded to 3 decimals, so agreement is judged to 1e-3 absolute.
GOLDEN_ATOL = 1e-3


def observable() -> SinglePauli:
    return SinglePauli(PauliString.single(N_WIRES, 1, "Z"))


def build(cnots) -> Circuit:
    gates = [rx(N_WIRES, j, j) for j in range(N_WIRES)]
    gates += [CNOT(c, t) for c, t in cnots]
    return Circuit(N_WIRES, tuple(gates), N_WIRES)


def candidates():
    """Candidate CNOT lists in scan order: edge order, then orientation bits."""
    for order in (EDGES, EDGES[::-1]):
        for flips in itertools.product((0, 1), repeat=len(EDGES)):
            yield tuple((b, a) if flip else (a, b) for (a, b), flip in zip(order, flips))


@dataclass(frozen=True, eq=False)
class Calibration:
    cnots: tuple
    matched: bool
    max_deviation: float
    candidate_index: int
    cost: float
    gradient: np.ndarray
    hessian: np.ndarray


def _values(circuit: Circuit):
    ev = ExactEvaluator(circuit, observable())
    return (
        ev(REFERENCE_ANGLES),
        derivative_tensor(ev, REFERENCE_ANGLES, 1).to_array(),
        derivative_tensor(ev, REFERENCE_ANGLES, 2).to_array(),
    )


def _deviation(cost, grad, hess) -> float:
    return float(max(
        abs(cost - GOLDEN_COST),
        np.max(np.abs(grad - GOLDEN_GRADIENT)),
        np.max(np.abs(hess - GOLDEN_HESSIAN)),
    ))


@functools.lru_cache(maxsize=1)
def calibrate() -> Calibration:
    """First candidate matching every golden value; the default one if none does."""
    first = None
    for i, cnots in enumerate(candidates()):
        cost, grad, hess = _values(build(cnots))
        dev = _deviation(cost, grad, hess)
        if first is None:
            first = Calibration(cnots, False, dev, 0, cost, grad, hess)
        if dev <= GOLDEN_ATOL:
            return Calibration(cnots, True, dev, i, cost, grad, hess)
    return first


def reference_circuit() -> Circuit:
    return build(calibrate().cnots)


def embed(pair, frozen=FROZEN) -> np.ndarray:
    """Full parameter vector from the two trainable angles and the frozen rest."""
    return np.array(list(pair) + list(frozen), dtype=float)
