"""Exact trigonometric surrogate of an expectation value from a 3**m grid.

Along each parameter the expectation is ``a + b cos(theta) + c sin(theta)``,
so the full function lives in the tensor-product basis
``{1, cos theta_j, sin theta_j}``.  Sampling at ``{0, +pi/2, -pi/2}`` per
parameter gives a 3x3 system per axis whose inverse is applied one axis at
a time.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

GRID = np.array([0.0, np.pi / 2, -np.pi / 2])
# rows: grid point, columns: basis (1, cos, sin)
BASIS_AT_GRID = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [1.0, 0.0, -1.0]])
_INV = np.linalg.inv(BASIS_AT_GRID)
MAX_PARAMS = 8


def _apply_axiswise(mat: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    for axis in range(tensor.ndim):
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=([1], [axis])), 0, axis)
    return tensor


@dataclass(frozen=True, eq=False)
class TrigSurrogate:
    coefficients: np.ndarray  # shape (3,) * m

    @property
    def m(self) -> int:
        return self.coefficients.ndim

    def _contract(self, theta, deriv_axis: int | None = None) -> float:
        out = self.coefficients
        for j, t in enumerate(np.asarray(theta, dtype=float)):
            if j == deriv_axis:
                b = np.array([0.0, -np.sin(t), np.cos(t)])
            else:
                b = np.array([1.0, np.cos(t), np.sin(t)])
            out = np.tensordot(b, out, axes=([0], [0]))
        return float(out)

    def __call__(self, theta) -> float:
        return self._contract(theta)

    def gradient(self, theta) -> np.ndarray:
        return np.array([self._contract(theta, j) for j in range(self.m)])

    def grid_values(self) -> np.ndarray:
        return _apply_axiswise(BASIS_AT_GRID, self.coefficients)


def grid_points(m: int) -> np.ndarray:
    """The 3**m fitting points, index order matching ``coefficients``."""
    return np.array([GRID[list(idx)] for idx in itertools.product(range(3), repeat=m)])


def trig_reconstruct(ev, m: int | None = None) -> TrigSurrogate:
    """Fit the surrogate from ``3**m`` exact evaluations of ``ev``.

    ``m`` defaults to the parameter count of ``ev.circuit``.
    """
    if m is None:
        m = ev.circuit.n_params
    if m > MAX_PARAMS:
        raise ValueError(f"reconstruction limited to m <= {MAX_PARAMS}, got {m}")
    values = np.array([ev(p) for p in grid_points(m)]).reshape((3,) * m)
    return TrigSurrogate(_apply_axiswise(_INV, values))
