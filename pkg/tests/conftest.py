"""Independent oracles shared by the test modules.

The dense oracle builds every gate as a full ``2**n x 2**n`` matrix from
explicit Kronecker products and bit manipulation, so it shares no code with
the tensor-contraction simulator under test.  The trigonometric oracle gets
exact derivatives from a discrete Fourier transform on a 120-degree grid,
which is a different sampling grid from the pi/2 shifts of the library.
"""
from __future__ import annotations

import itertools
from collections import Counter

import numpy as np
import pytest

from qderiv.circuit import CNOT, FixedRotation, Hadamard, Rotation, Unitary
from qderiv.simulator import ZeroProjector

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT_4 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def pauli_dense(letters: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in letters:
        out = np.kron(out, PAULI[c])
    return out


def embed(mat: np.ndarray, wires, n: int) -> np.ndarray:
    """Full matrix of ``mat`` acting on ``wires`` (wire 0 = most significant bit)."""
    dim, k = 2 ** n, len(wires)
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - w)) & 1 for w in range(n)]
        sub_col = sum(bits[w] << (k - 1 - i) for i, w in enumerate(wires))
        for sub_row in range(2 ** k):
            nb = list(bits)
            for i, w in enumerate(wires):
                nb[w] = (sub_row >> (k - 1 - i)) & 1
            row = sum(b << (n - 1 - w) for w, b in enumerate(nb))
            out[row, col] += mat[sub_row, sub_col]
    return out


def dense_gate(gate, params, n: int) -> np.ndarray:
    if isinstance(gate, (Rotation, FixedRotation)):
        angle = params[gate.param] if isinstance(gate, Rotation) else gate.angle
        p = pauli_dense(gate.generator.letters)
        return np.cos(angle / 2) * np.eye(2 ** n) - 1j * np.sin(angle / 2) * p
    if isinstance(gate, CNOT):
        return embed(CNOT_4, (gate.control, gate.target), n)
    if isinstance(gate, Hadamard):
        return embed(H_GATE, (gate.wire,), n)
    if isinstance(gate, Unitary):
        return embed(np.asarray(gate.matrix), gate.wires, n)
    raise TypeError(gate)


def dense_state(circuit, params) -> np.ndarray:
    n = circuit.n_wires
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1.0
    for gate in circuit.gates:
        psi = dense_gate(gate, params, n) @ psi
    return psi


def dense_expectation(circuit, params, obs) -> float:
    psi = dense_state(circuit, np.asarray(params, dtype=float))
    if isinstance(obs, ZeroProjector):
        return float(abs(psi[0]) ** 2)
    return float(np.vdot(psi, pauli_dense(obs.pauli.letters) @ psi).real)


def fd_oracle(fn, theta, indices, h: float = 1e-5) -> float:
    """Central differences written out directly (orders 1 and 2)."""
    theta = np.asarray(theta, dtype=float)
    e = np.eye(theta.shape[0]) * h
    if len(indices) == 1:
        (j,) = indices
        return (fn(theta + e[j]) - fn(theta - e[j])) / (2 * h)
    j, k = indices
    return (fn(theta + e[j] + e[k]) - fn(theta + e[j] - e[k])
            - fn(theta - e[j] + e[k]) + fn(theta - e[j] - e[k])) / (4 * h * h)


def trig_oracle(fn, theta, indices) -> float:
    """Exact mixed derivative from a 3-point DFT along each differentiated axis."""
    theta = np.asarray(theta, dtype=float)
    mult = Counter(indices)
    axes = sorted(mult)
    grid = 2 * np.pi * np.arange(3) / 3
    vals = np.zeros((3,) * len(axes))
    for idx in itertools.product(range(3), repeat=len(axes)):
        p = theta.copy()
        for a, i in zip(axes, idx):
            p[a] += grid[i]
        vals[idx] = fn(p)
    coeffs = np.fft.fftn(vals) / 3 ** len(axes)  # frequencies 0, 1, -1
    freqs = np.array([0, 1, -1])
    total = 0j
    for idx in itertools.product(range(3), repeat=len(axes)):
        term = coeffs[idx]
        for a, i in zip(axes, idx):
            term *= (1j * freqs[i]) ** mult[a]
        total += term
    return float(total.real)


def metric_oracle(circuit, theta, h: float = 1e-6) -> np.ndarray:
    """``Re[<d_j psi|d_k psi> - <d_j psi|psi><psi|d_k psi>]`` from state finite differences."""
    theta = np.asarray(theta, dtype=float)
    m = theta.shape[0]
    psi = dense_state(circuit, theta)
    d = []
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        d.append((dense_state(circuit, theta + e) - dense_state(circuit, theta - e)) / (2 * h))
    out = np.zeros((m, m))
    for j in range(m):
        for k in range(m):
            out[j, k] = (np.vdot(d[j], d[k]) - np.vdot(d[j], psi) * np.vdot(psi, d[k])).real
    return out


# ---------------------------------------------------------------------------
# acceptance-line reporting

_CRITERIA: dict[str, str] = {}


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL verdict; lines are echoed in the terminal summary."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        line = f"{name}: {'PASS' if passed else 'FAIL'}" + (f" ({detail})" if detail else "")
        _CRITERIA[name] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for name in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[name])
