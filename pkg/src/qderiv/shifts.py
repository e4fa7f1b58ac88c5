"""Shift vectors, shift sets and linear evaluation plans.

Every derivative rule in the package, exact or finite-difference, is a
fixed linear combination of expectation values at shifted parameter
points.  A :class:`ShiftPlan` stores those points (as offsets from the
base parameters) once, deduplicated, together with a weight matrix with
one row per output entry.  Evaluating a plan therefore samples every
distinct point exactly once, which is what lets shared shifts be reused
inside one tensor build.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularShiftError, UnsupportedShiftError

HALF_PI = np.pi / 2


@dataclass(frozen=True, eq=False)
class ShiftVector:
    vector: np.ndarray
    parity: int


@dataclass(frozen=True)
class ShiftSet:
    indices: tuple[int, ...]
    vectors: tuple[ShiftVector, ...]

    def __len__(self):
        return len(self.vectors)


def shift_set(indices, m: int, s: float = HALF_PI) -> ShiftSet:
    """All ``2**d`` sign choices of ``s * (+-e_j1 +- ... +- e_jd)`` with their parities."""
    indices = tuple(int(j) for j in indices)
    if not indices:
        raise ValueError("shift set needs at least one derivative index")
    if any(not 0 <= j < m for j in indices):
        raise ValueError(f"derivative indices {indices} out of range for m={m}")
    vectors = []
    for units, parity in _signed_units(indices, m):
        vectors.append(ShiftVector(units * s, parity))
    return ShiftSet(indices, tuple(vectors))


def _signed_units(indices, m):
    for signs in itertools.product((1, -1), repeat=len(indices)):
        units = np.zeros(m, dtype=int)
        for j, sign in zip(indices, signs):
            units[j] += sign
        yield units, int(np.prod(signs))


def eval_count(m: int, d: int) -> int:
    """Upper bound on distinct expectation values for an order-``d`` tensor."""
    if m < 1 or d < 1:
        raise ValueError("need m >= 1 and d >= 1")
    return min(2 ** d * math.comb(m + d - 1, d), 3 ** m)


@dataclass(frozen=True, eq=False)
class ShiftPlan:
    offsets: np.ndarray  # (P, m)
    weights: np.ndarray  # (K, P)

    @property
    def n_points(self) -> int:
        return self.offsets.shape[0]

    def points(self, theta) -> np.ndarray:
        return np.asarray(theta, dtype=float)[None, :] + self.offsets

    def combine(self, values) -> np.ndarray:
        return self.weights @ np.asarray(values, dtype=float)


def _pi_reduce(units: np.ndarray):
    """Rewrite a pi/2-unit shift onto the {0, +-pi/2} grid.

    Uses 2*pi periodicity and f(x + pi) = f(x + pi/2) + f(x - pi/2) - f(x),
    applied coordinate by coordinate.
    """
    options = []
    for u in np.mod(units, 4):
        if u == 0:
            options.append(((0, 1),))
        elif u == 1:
            options.append(((1, 1),))
        elif u == 3:
            options.append(((-1, 1),))
        else:
            options.append(((1, 1), (-1, 1), (0, -1)))
    for combo in itertools.product(*options):
        yield np.array([c[0] for c in combo], dtype=int), int(np.prod([c[1] for c in combo]))


def _entry(terms: dict, m: int, step: float, denom: float) -> ShiftPlan:
    keys = [k for k, c in terms.items() if c != 0]
    offsets = np.array([np.array(k, dtype=float) * step for k in keys]).reshape(len(keys), m)
    weights = np.array([[terms[k] / denom for k in keys]])
    return ShiftPlan(offsets, weights)


def ps_plan(indices, m: int, s: float = HALF_PI, reduce_pi: bool = True) -> ShiftPlan:
    """Plan for one entry of the order-``d`` parameter-shift rule.

    ``s`` other than pi/2 is only defined for d <= 2.  With ``s == pi/2`` and
    ``reduce_pi`` the shifts are folded onto the 3-point grid per parameter.
    """
    indices = tuple(int(j) for j in indices)
    d = len(indices)
    if d == 0:
        raise ValueError("need at least one derivative index")
    if abs(math.sin(s)) < 1e-12:
        raise SingularShiftError(f"shift {s} is a multiple of pi")
    exact_half_pi = s == HALF_PI
    if d > 2 and not exact_half_pi:
        raise UnsupportedShiftError("orders above 2 are only defined for s = pi/2")
    terms: dict[tuple, int] = {}
    for units, parity in _signed_units(indices, m):
        expanded = _pi_reduce(units) if (exact_half_pi and reduce_pi) else [(units, 1)]
        for u, c in expanded:
            key = tuple(int(x) for x in u)
            terms[key] = terms.get(key, 0) + parity * c
    return _entry(terms, m, s, (2 * math.sin(s)) ** d)


def fd_plan(indices, m: int, h: float, scheme: str = "central") -> ShiftPlan:
    """Plan for one finite-difference entry (central d=1,2; forward d=1)."""
    indices = tuple(int(j) for j in indices)
    d = len(indices)
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if scheme == "central" and d in (1, 2):
        terms: dict[tuple, int] = {}
        for units, parity in _signed_units(indices, m):
            key = tuple(int(x) for x in units)
            terms[key] = terms.get(key, 0) + parity
        return _entry(terms, m, h, (2 * h) ** d)
    if scheme == "forward" and d == 1:
        up = [0] * m
        up[indices[0]] = 1
        return _entry({tuple(up): 1, (0,) * m: -1}, m, h, h)
    raise UnsupportedShiftError(f"finite-difference scheme {scheme!r} not defined for order {d}")


def merge_plans(plans) -> ShiftPlan:
    """Stack entry plans, sharing identical offsets (first-occurrence order)."""
    plans = list(plans)
    m = plans[0].offsets.shape[1]
    index: dict[bytes, int] = {}
    rows = []
    for plan in plans:
        for k in range(plan.weights.shape[0]):
            row: dict[int, float] = {}
            for p in range(plan.n_points):
                key = (plan.offsets[p] + 0.0).tobytes()
                col = index.setdefault(key, len(index))
                row[col] = row.get(col, 0.0) + plan.weights[k, p]
            rows.append(row)
    offsets = np.zeros((len(index), m))
    for key, col in index.items():
        offsets[col] = np.frombuffer(key, dtype=float)
    weights = np.zeros((len(rows), len(index)))
    for r, row in enumerate(rows):
        for col, w in row.items():
            weights[r, col] = w
    return ShiftPlan(offsets, weights)
