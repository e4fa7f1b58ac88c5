"""Dense statevector simulation and the finite-shot sampling model.

Shot noise is modelled exactly: a single-Pauli observable yields +-1
outcomes and the all-zeros projector yields 0/1 outcomes, so the sum of
``N`` shots is a binomial count.  Random numbers come from numpy's
``Philox`` (Philox-4x64-10, counter based) keyed by the 128-bit value
``seed | stream << 64``; the pair ``(seed, stream)`` fully determines a
stream and distinct pairs give independent streams.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .circuit import (
    CNOT, HADAMARD, Circuit, FixedRotation, Hadamard, PauliString, Rotation, Unitary,
    _PAULI_MATRICES, overlap_circuit,
)
from .errors import ParameterCountError, ShotCountError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SinglePauli:
    pauli: PauliString


@dataclass(frozen=True)
class ZeroProjector:
    """Projector onto ``|0...0>``."""


Observable = Union[SinglePauli, ZeroProjector]


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    n_wires: int

    def __post_init__(self):
        self.amplitudes.setflags(write=False)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


# ---------------------------------------------------------------------------
# gate application on a (2,)*n tensor

def _apply_1q(psi: np.ndarray, mat: np.ndarray, wire: int) -> np.ndarray:
    out = np.tensordot(mat, psi, axes=([1], [wire]))
    return np.moveaxis(out, 0, wire)


def _apply_pauli(psi: np.ndarray, pauli: PauliString) -> np.ndarray:
    out = psi
    for wire, letter in enumerate(pauli.letters):
        if letter == "X":
            out = np.flip(out, axis=wire)
        elif letter == "Z":
            shape = [1] * psi.ndim
            shape[wire] = 2
            out = out * np.array([1.0, -1.0]).reshape(shape)
        elif letter == "Y":
            out = _apply_1q(out, _PAULI_MATRICES["Y"], wire)
    return out


def _apply_rotation(psi: np.ndarray, pauli: PauliString, theta: float) -> np.ndarray:
    return np.cos(theta / 2) * psi - 1j * np.sin(theta / 2) * _apply_pauli(psi, pauli)


def _apply_cnot(psi: np.ndarray, control: int, target: int) -> np.ndarray:
    out = psi.copy()
    idx = [slice(None)] * psi.ndim
    idx[control] = 1
    idx = tuple(idx)
    axis = target if target < control else target - 1
    out[idx] = np.flip(psi[idx], axis=axis)
    return out


def _apply_dense(psi: np.ndarray, mat: np.ndarray, wires: tuple[int, ...]) -> np.ndarray:
    k = len(wires)
    tensor = mat.reshape((2,) * (2 * k))
    out = np.tensordot(tensor, psi, axes=(list(range(k, 2 * k)), list(wires)))
    return np.moveaxis(out, list(range(k)), list(wires))


def _check_params(circuit: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != circuit.n_params:
        raise ParameterCountError(f"circuit has {circuit.n_params} parameters, got {params.shape[0]}")
    return params


def _evolve(circuit: Circuit, params: np.ndarray) -> np.ndarray:
    n = circuit.n_wires
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for gate in circuit.gates:
        if isinstance(gate, Rotation):
            psi = _apply_rotation(psi, gate.generator, params[gate.param])
        elif isinstance(gate, FixedRotation):
            psi = _apply_rotation(psi, gate.generator, gate.angle)
        elif isinstance(gate, CNOT):
            psi = _apply_cnot(psi, gate.control, gate.target)
        elif isinstance(gate, Hadamard):
            psi = _apply_1q(psi, HADAMARD, gate.wire)
        elif isinstance(gate, Unitary):
            psi = _apply_dense(psi, gate.matrix, gate.wires)
        else:
            raise TypeError(f"unknown gate {gate!r}")
    return psi.reshape(-1)


def run_circuit(circuit: Circuit, params) -> StateVector:
    """Return ``U(params)|0...0>``."""
    params = _check_params(circuit, params)
    return StateVector(_evolve(circuit, params), circuit.n_wires)


def _expectation_of_state(amps: np.ndarray, n_wires: int, obs: Observable) -> float:
    if isinstance(obs, ZeroProjector):
        return float(abs(amps[0]) ** 2)
    if obs.pauli.n_wires != n_wires:
        raise ValueError(f"observable spans {obs.pauli.n_wires} wires, circuit has {n_wires}")
    psi = amps.reshape((2,) * n_wires)
    return float(np.vdot(psi, _apply_pauli(psi, obs.pauli)).real)


def expectation(circuit: Circuit, params, obs: Observable) -> float:
    """Exact ``<psi(params)| M |psi(params)>``."""
    state = run_circuit(circuit, params)
    return _expectation_of_state(state.amplitudes, circuit.n_wires, obs)


def overlap_probability(circuit: Circuit, params, params2) -> float:
    """``|<psi(params2)|psi(params)>|^2``."""
    a = run_circuit(circuit, params).amplitudes
    b = run_circuit(circuit, params2).amplitudes
    return float(abs(np.vdot(b, a)) ** 2)


def overlap_via_projector(circuit: Circuit, params, params2) -> float:
    """Same quantity as :func:`overlap_probability`, via the composite circuit."""
    return expectation(overlap_circuit(circuit, params2), params, ZeroProjector())


def single_shot_variance(circuit: Circuit, params, obs: Observable) -> float:
    """``<M^2> - <M>^2`` for one shot."""
    f = expectation(circuit, params, obs)
    return variance_from_mean(f, obs)


def variance_from_mean(f, obs: Observable):
    if isinstance(obs, ZeroProjector):
        return f * (1.0 - f)
    return 1.0 - f * f


# ---------------------------------------------------------------------------
# shot model

def make_rng(seed: int, stream: int) -> np.random.Generator:
    key = (int(seed) & _MASK64) | ((int(stream) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ShotModel:
    shots: int
    seed: int
    stream: int = 0

    def __post_init__(self):
        if int(self.shots) != self.shots or self.shots < 1:
            raise ShotCountError(f"shot count must be a positive integer, got {self.shots}")

    def rng(self) -> np.random.Generator:
        return make_rng(self.seed, self.stream)

    def with_stream(self, stream: int) -> "ShotModel":
        return ShotModel(self.shots, self.seed, stream)


def sample_means(exact, obs: Observable, shots: int, rng: np.random.Generator, size=None):
    """Sample means of ``shots`` measurements for each exact expectation value.

    ``exact`` may be a scalar or an array; ``size`` adds leading repetition axes.
    """
    if int(shots) != shots or shots < 1:
        raise ShotCountError(f"shot count must be a positive integer, got {shots}")
    exact = np.asarray(exact, dtype=float)
    if isinstance(obs, ZeroProjector):
        p = np.clip(exact, 0.0, 1.0)
    else:
        p = np.clip((1.0 + exact) / 2.0, 0.0, 1.0)
    shape = exact.shape if size is None else tuple(np.atleast_1d(size)) + exact.shape
    counts = rng.binomial(int(shots), np.broadcast_to(p, shape))
    if isinstance(obs, ZeroProjector):
        return counts / shots
    return (2.0 * counts - shots) / shots


def sample_expectation(circuit: Circuit, params, obs: Observable, shots: ShotModel) -> float:
    """Mean of ``shots.shots`` simulated measurement outcomes."""
    f = expectation(circuit, params, obs)
    return float(sample_means(f, obs, shots.shots, shots.rng()))
