"""Circuit description: Pauli strings, gates and the parameterised circuit.

Conventions
-----------
* Wire 0 is the most significant bit of a basis-state index, i.e. the
  state tensor has shape ``(2,) * n`` in C order with axis ``w`` = wire ``w``.
* A rotation gate with generator ``P`` and angle ``theta`` implements
  ``exp(-i theta P / 2) = cos(theta/2) I - i sin(theta/2) P``.
* Every trainable parameter drives exactly one rotation gate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

MAX_WIRES = 12

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class PauliString:
    """Dense Pauli string, one letter per wire (``"IZIII"``)."""

    letters: str

    def __post_init__(self):
        if not self.letters:
            raise ValueError("Pauli string needs at least one wire")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @classmethod
    def single(cls, n_wires: int, wire: int, letter: str) -> "PauliString":
        if not 0 <= wire < n_wires:
            raise ValueError(f"wire {wire} out of range for {n_wires} wires")
        chars = ["I"] * n_wires
        chars[wire] = letter
        return cls("".join(chars))

    @classmethod
    def from_dict(cls, n_wires: int, letters: dict[int, str]) -> "PauliString":
        chars = ["I"] * n_wires
        for wire, letter in letters.items():
            chars[wire] = letter
        return cls("".join(chars))

    @property
    def n_wires(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(w for w, c in enumerate(self.letters) if c != "I")

    def matrix(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix; only sensible for small ``n``."""
        out = np.ones((1, 1), dtype=complex)
        for c in self.letters:
            out = np.kron(out, _PAULI_MATRICES[c])
        return out

    def __str__(self) -> str:
        return self.letters


@dataclass(frozen=True)
class Rotation:
    """Trainable rotation ``exp(-i theta_k P / 2)`` with ``k = param``."""

    generator: PauliString
    param: int

    def __post_init__(self):
        if self.generator.is_identity:
            raise ValueError("rotation generator must not be the identity")
        if self.param < 0:
            raise ValueError("parameter index must be non-negative")

    @property
    def wires(self) -> tuple[int, ...]:
        return self.generator.support


@dataclass(frozen=True)
class FixedRotation:
    """Rotation with a frozen angle; not a trainable parameter."""

    generator: PauliString
    angle: float

    def __post_init__(self):
        if self.generator.is_identity:
            raise ValueError("rotation generator must not be the identity")

    @property
    def wires(self) -> tuple[int, ...]:
        return self.generator.support


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("CNOT control and target must differ")

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.control, self.target)


@dataclass(frozen=True)
class Hadamard:
    wire: int

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.wire,)


@dataclass(frozen=True, eq=False)
class Unitary:
    """Dense fixed unitary acting on ``wires`` (first wire = most significant)."""

    matrix: np.ndarray
    wires: tuple[int, ...]

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        wires = tuple(int(w) for w in self.wires)
        dim = 2 ** len(wires)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match {len(wires)} wires")
        if len(set(wires)) != len(wires):
            raise ValueError("repeated wire in dense unitary")
        if not np.allclose(mat.conj().T @ mat, np.eye(dim), atol=1e-10, rtol=0):
            raise ValueError("dense gate matrix is not unitary within 1e-10")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "wires", wires)


Gate = Union[Rotation, FixedRotation, CNOT, Hadamard, Unitary]


def rotation_matrix(generator: PauliString, theta: float) -> np.ndarray:
    """Dense matrix of ``exp(-i theta P / 2)`` over all wires of ``generator``."""
    dim = 2 ** generator.n_wires
    return np.cos(theta / 2) * np.eye(dim) - 1j * np.sin(theta / 2) * generator.matrix()


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list acting on ``n_wires`` qubits initialised in ``|0...0>``."""

    n_wires: int
    gates: tuple = field(default_factory=tuple)
    n_params: int | None = None

    def __post_init__(self):
        if not 1 <= self.n_wires <= MAX_WIRES:
            raise ValueError(f"wire count must be in [1, {MAX_WIRES}], got {self.n_wires}")
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        seen: dict[int, int] = {}
        for pos, gate in enumerate(gates):
            if isinstance(gate, (Rotation, FixedRotation)) and gate.generator.n_wires != self.n_wires:
                raise ValueError(f"gate {pos}: generator spans {gate.generator.n_wires} wires, circuit has {self.n_wires}")
            if any(not 0 <= w < self.n_wires for w in gate.wires):
                raise ValueError(f"gate {pos}: wire index out of range")
            if isinstance(gate, Rotation):
                if gate.param in seen:
                    raise ValueError(
                        f"parameter {gate.param} drives gates {seen[gate.param]} and {pos}; "
                        "each parameter must appear in exactly one rotation"
                    )
                seen[gate.param] = pos
        m = len(seen) if self.n_params is None else self.n_params
        if sorted(seen) != list(range(m)):
            raise ValueError(f"rotation parameter indices {sorted(seen)} do not cover 0..{m - 1}")
        object.__setattr__(self, "n_params", m)

    def param_gate(self, index: int) -> Rotation:
        for gate in self.gates:
            if isinstance(gate, Rotation) and gate.param == index:
                return gate
        raise IndexError(index)


def rx(n_wires: int, wire: int, param: int) -> Rotation:
    return Rotation(PauliString.single(n_wires, wire, "X"), param)


def ry(n_wires: int, wire: int, param: int) -> Rotation:
    return Rotation(PauliString.single(n_wires, wire, "Y"), param)


def rz(n_wires: int, wire: int, param: int) -> Rotation:
    return Rotation(PauliString.single(n_wires, wire, "Z"), param)


def bind(circuit: Circuit, params) -> Circuit:
    """Freeze every trainable rotation at its value in ``params``."""
    params = np.asarray(params, dtype=float)
    gates = [
        FixedRotation(g.generator, float(params[g.param])) if isinstance(g, Rotation) else g
        for g in circuit.gates
    ]
    return Circuit(circuit.n_wires, tuple(gates), 0)


def adjoint_fixed(circuit: Circuit, params) -> list:
    """Gates of ``U(params)^dagger`` as fixed gates (reverse order, inverted)."""
    params = np.asarray(params, dtype=float)
    out = []
    for g in reversed(circuit.gates):
        if isinstance(g, Rotation):
            out.append(FixedRotation(g.generator, -float(params[g.param])))
        elif isinstance(g, FixedRotation):
            out.append(FixedRotation(g.generator, -g.angle))
        elif isinstance(g, Unitary):
            out.append(Unitary(g.matrix.conj().T, g.wires))
        else:
            out.append(g)  # CNOT and H are self-inverse
    return out


def overlap_circuit(circuit: Circuit, reference) -> Circuit:
    """Composite circuit ``U(reference)^dagger U(theta)``.

    Its all-zeros probability is ``|<psi(reference)|psi(theta)>|^2``; the
    trainable parameters are those of ``circuit``.
    """
    return Circuit(
        circuit.n_wires,
        tuple(circuit.gates) + tuple(adjoint_fixed(circuit, reference)),
        circuit.n_params,
    )


def random_circuit(n_wires: int, n_params: int, rng: np.random.Generator,
                   n_fixed: int | None = None, max_weight: int = 2) -> Circuit:
    """Random circuit with ``n_params`` Pauli rotations interleaved with fixed gates."""
    if n_fixed is None:
        n_fixed = n_params + n_wires
    gates: list = []
    for _ in range(n_fixed):
        kind = rng.integers(3) if n_wires > 1 else rng.choice([0, 2])
        if kind == 0:
            gates.append(Hadamard(int(rng.integers(n_wires))))
        elif kind == 1:
            c, t = rng.choice(n_wires, size=2, replace=False)
            gates.append(CNOT(int(c), int(t)))
        else:
            gates.append(FixedRotation(_random_pauli(n_wires, rng, max_weight), float(rng.uniform(0, 2 * np.pi))))
    for k in range(n_params):
        pos = int(rng.integers(len(gates) + 1))
        gates.insert(pos, Rotation(_random_pauli(n_wires, rng, max_weight), k))
    return Circuit(n_wires, tuple(gates), n_params)


def _random_pauli(n_wires: int, rng: np.random.Generator, max_weight: int) -> PauliString:
    weight = int(rng.integers(1, min(max_weight, n_wires) + 1))
    wires = rng.choice(n_wires, size=weight, replace=False)
    return PauliString.from_dict(n_wires, {int(w): "XYZ"[rng.integers(3)] for w in wires})


# ---------------------------------------------------------------------------
# JSON circuit description files

def circuit_to_dict(circuit: Circuit) -> dict:
    entries = []
    for g in circuit.gates:
        if isinstance(g, Rotation):
            entries.append({"kind": "rotation", "generator": g.generator.letters, "param": g.param})
        elif isinstance(g, FixedRotation):
            entries.append({"kind": "rotation", "generator": g.generator.letters, "angle": g.angle})
        elif isinstance(g, CNOT):
            entries.append({"kind": "cnot", "wires": [g.control, g.target]})
        elif isinstance(g, Hadamard):
            entries.append({"kind": "h", "wires": [g.wire]})
        else:
            entries.append({
                "kind": "unitary",
                "wires": list(g.wires),
                "real": g.matrix.real.tolist(),
                "imag": g.matrix.imag.tolist(),
            })
    return {"n_wires": circuit.n_wires, "n_params": circuit.n_params, "gates": entries}


def circuit_from_dict(data: dict) -> Circuit:
    n = int(data["n_wires"])
    gates = []
    for pos, e in enumerate(data["gates"]):
        kind = e["kind"]
        if kind == "rotation":
            gen = PauliString(e["generator"])
            if ("param" in e) == ("angle" in e):
                raise ValueError(f"gate {pos}: rotation needs exactly one of 'param' or 'angle'")
            gates.append(Rotation(gen, int(e["param"])) if "param" in e else FixedRotation(gen, float(e["angle"])))
        elif kind == "cnot":
            c, t = e["wires"]
            gates.append(CNOT(int(c), int(t)))
        elif kind == "h":
            (w,) = e["wires"]
            gates.append(Hadamard(int(w)))
        elif kind == "unitary":
            mat = np.asarray(e["real"], dtype=float) + 1j * np.asarray(e["imag"], dtype=float)
            gates.append(Unitary(mat, tuple(e["wires"])))
        else:
            raise ValueError(f"gate {pos}: unknown kind {kind!r}")
    return Circuit(n, tuple(gates), data.get("n_params"))


def save_circuit(circuit: Circuit, path) -> None:
    Path(path).write_text(json.dumps(circuit_to_dict(circuit), indent=2) + "\n")


def load_circuit(path) -> Circuit:
    return circuit_from_dict(json.loads(Path(path).read_text()))
