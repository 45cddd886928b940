"""Statevector and density-matrix circuit execution.

Gates use the full-angle rotation convention R_P(phi) = exp(-i phi P).
Pure states are automatically promoted to density matrices when a noise
channel is encountered.  Qubit targets are 1-based, matching the operator
conventions of the rest of the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (MATRIX_QUBIT_CAP, PAULI_MATRICES, STATE_QUBIT_CAP,
                        OperatorSum, PauliString, to_dense)

GATE_KINDS = ("RX", "RY", "RZ", "RPauliString", "CNOT", "X", "DepolarizeTwoQubit")


@dataclass(frozen=True)
class Gate:
    """One circuit element: a rotation, an entangler, or a noise marker."""

    kind: str
    targets: tuple[int, ...]
    angle: float = 0.0
    letters: str = ""

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind in ("RX", "RY", "RZ", "X") and len(self.targets) != 1:
            raise ValueError(f"{self.kind} acts on exactly one qubit")
        if self.kind in ("CNOT", "DepolarizeTwoQubit") and len(self.targets) != 2:
            raise ValueError(f"{self.kind} acts on exactly two qubits")
        if self.kind == "RPauliString" and len(self.letters) != len(self.targets):
            raise ValueError("RPauliString needs one letter per target")

    def is_two_qubit_unitary(self) -> bool:
        """True for entangling two-qubit gates (what noise models attach to)."""
        if self.kind == "CNOT":
            return True
        return (self.kind == "RPauliString" and len(self.targets) == 2
                and set(self.letters) != {"I"})


def rx(q: int, angle: float) -> Gate:
    return Gate("RX", (q,), angle)


def ry(q: int, angle: float) -> Gate:
    return Gate("RY", (q,), angle)


def rz(q: int, angle: float) -> Gate:
    return Gate("RZ", (q,), angle)


def rpauli(targets: tuple[int, ...], letters: str, angle: float) -> Gate:
    return Gate("RPauliString", tuple(targets), angle, letters)


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def xgate(q: int) -> Gate:
    return Gate("X", (q,))


def depolarize(i: int, j: int, strength: float) -> Gate:
    return Gate("DepolarizeTwoQubit", (i, j), strength)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 1 <= t <= self.n_qubits for t in g.targets):
                raise ValueError(f"gate target out of range in {g}")

    def two_qubit_gate_count(self) -> int:
        return sum(g.is_two_qubit_unitary() for g in self.gates)

    def with_depolarizing_noise(self, strength: float) -> "Circuit":
        """Insert a two-qubit depolarizing channel after each entangler."""
        gates: list[Gate] = []
        for g in self.gates:
            gates.append(g)
            if g.is_two_qubit_unitary():
                gates.append(depolarize(g.targets[0], g.targets[1], strength))
        return Circuit(self.n_qubits, tuple(gates))


class QuantumState:
    """A pure statevector or a dense density matrix on n qubits."""

    __slots__ = ("n_qubits", "kind", "data")

    def __init__(self, n_qubits: int, kind: str, data: np.ndarray,
                 validate: bool = True):
        if kind not in ("pure", "mixed"):
            raise ValueError("kind must be 'pure' or 'mixed'")
        if n_qubits > STATE_QUBIT_CAP:
            raise ValueError(f"state cap is {STATE_QUBIT_CAP} qubits")
        dim = 1 << n_qubits
        data = np.asarray(data, dtype=complex)
        expected = (dim,) if kind == "pure" else (dim, dim)
        if data.shape != expected:
            raise ValueError(f"state data must have shape {expected}")
        if kind == "mixed" and n_qubits > MATRIX_QUBIT_CAP:
            raise ValueError(f"density-matrix cap is {MATRIX_QUBIT_CAP} qubits")
        self.n_qubits = n_qubits
        self.kind = kind
        self.data = data
        if validate:
            self.validate()

    def validate(self) -> None:
        if self.kind == "pure":
            if abs(np.linalg.norm(self.data) - 1.0) > 1e-10:
                raise ValueError("statevector is not normalized")
        else:
            rho = self.data
            if np.linalg.norm(rho - rho.conj().T) > 1e-10:
                raise ValueError("density matrix is not Hermitian")
            if abs(np.trace(rho).real - 1.0) > 1e-10:
                raise ValueError("density matrix does not have unit trace")
            if np.linalg.eigvalsh(rho).min() < -1e-9:
                raise ValueError("density matrix is not positive semidefinite")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_statevector(cls, vec: np.ndarray) -> "QuantumState":
        vec = np.asarray(vec, dtype=complex)
        n = int(vec.size).bit_length() - 1
        return cls(n, "pure", vec)

    @classmethod
    def from_density_matrix(cls, rho: np.ndarray,
                            validate: bool = True) -> "QuantumState":
        rho = np.asarray(rho, dtype=complex)
        n = int(rho.shape[0]).bit_length() - 1
        return cls(n, "mixed", rho, validate=validate)

    @classmethod
    def from_bitstring(cls, bits: str) -> "QuantumState":
        vec = np.zeros(1 << len(bits), dtype=complex)
        vec[int(bits, 2)] = 1.0
        return cls(len(bits), "pure", vec, validate=False)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "QuantumState":
        dim = 1 << n_qubits
        return cls(n_qubits, "mixed", np.eye(dim, dtype=complex) / dim,
                   validate=False)

    # -- conversions ----------------------------------------------------------

    def to_mixed(self) -> "QuantumState":
        if self.kind == "mixed":
            return self
        rho = np.outer(self.data, self.data.conj())
        return QuantumState(self.n_qubits, "mixed", rho, validate=False)

    def density_matrix(self) -> np.ndarray:
        return self.to_mixed().data

    def probabilities(self) -> np.ndarray:
        if self.kind == "pure":
            return np.abs(self.data) ** 2
        return np.clip(np.real(np.diag(self.data)), 0.0, None)

    def copy(self) -> "QuantumState":
        return QuantumState(self.n_qubits, self.kind, self.data.copy(),
                            validate=False)

    def __repr__(self) -> str:
        return f"QuantumState(n_qubits={self.n_qubits}, kind={self.kind!r})"


# -- gate matrices and application ------------------------------------------------


def _rotation_matrix(pauli: np.ndarray, angle: float) -> np.ndarray:
    dim = pauli.shape[0]
    return np.cos(angle) * np.eye(dim) - 1j * np.sin(angle) * pauli


_CNOT = np.array([[1, 0, 0, 0],
                  [0, 1, 0, 0],
                  [0, 0, 0, 1],
                  [0, 0, 1, 0]], dtype=complex)


def gate_unitary(gate: Gate) -> np.ndarray:
    """The 2^k x 2^k unitary of a (non-channel) gate on its targets."""
    if gate.kind == "RX":
        return _rotation_matrix(PAULI_MATRICES["X"], gate.angle)
    if gate.kind == "RY":
        return _rotation_matrix(PAULI_MATRICES["Y"], gate.angle)
    if gate.kind == "RZ":
        return _rotation_matrix(PAULI_MATRICES["Z"], gate.angle)
    if gate.kind == "X":
        return PAULI_MATRICES["X"].copy()
    if gate.kind == "CNOT":
        return _CNOT.copy()
    if gate.kind == "RPauliString":
        return _rotation_matrix(PauliString(gate.letters).to_dense(), gate.angle)
    raise ValueError(f"{gate.kind} has no unitary")


def _apply_on_axes(tensor: np.ndarray, mat: np.ndarray, axes: tuple[int, ...],
                   n_axes_total: int) -> np.ndarray:
    """Contract mat (2^k x 2^k) into the given axes of a (2,)*m tensor."""
    k = len(axes)
    mat_t = mat.reshape((2,) * (2 * k))
    moved = np.tensordot(mat_t, tensor, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(moved, tuple(range(k)), axes)


def _apply_unitary_pure(vec: np.ndarray, mat: np.ndarray,
                        targets: tuple[int, ...], n: int) -> np.ndarray:
    axes = tuple(t - 1 for t in targets)
    tensor = vec.reshape((2,) * n)
    return _apply_on_axes(tensor, mat, axes, n).reshape(-1)


def _apply_unitary_mixed(rho: np.ndarray, mat: np.ndarray,
                         targets: tuple[int, ...], n: int) -> np.ndarray:
    row_axes = tuple(t - 1 for t in targets)
    col_axes = tuple(n + t - 1 for t in targets)
    tensor = rho.reshape((2,) * (2 * n))
    tensor = _apply_on_axes(tensor, mat, row_axes, 2 * n)
    tensor = _apply_on_axes(tensor, mat.conj(), col_axes, 2 * n)
    return tensor.reshape(1 << n, 1 << n)


_TWO_QUBIT_PAULIS = [
    np.kron(PAULI_MATRICES[a], PAULI_MATRICES[b])
    for a in "IXYZ" for b in "IXYZ" if (a, b) != ("I", "I")
]


def depolarize_two_qubit(state: QuantumState, i: int, j: int,
                         strength: float) -> QuantumState:
    """Two-qubit depolarizing channel on qubits (i, j).

    E(rho) = (1 - 15 L/16) rho + (L/16) sum_{P_i P_j != II} P rho P,
    applied as the explicit 15-term Pauli sum.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError("channel strength must lie in [0, 1]")
    mixed = state.to_mixed()
    rho = mixed.data
    n = state.n_qubits
    acc = np.zeros_like(rho)
    for pauli in _TWO_QUBIT_PAULIS:
        conj = _apply_unitary_mixed(rho, pauli, (i, j), n)
        acc += conj
    out = (1.0 - 15.0 * strength / 16.0) * rho + (strength / 16.0) * acc
    return QuantumState(n, "mixed", out, validate=False)


def apply(state: QuantumState, circuit: Circuit) -> QuantumState:
    """Run a circuit on a state, returning a new state.

    Unitary gates act as U rho U† (or U|psi>); DepolarizeTwoQubit markers
    apply the channel, promoting a pure state to a density matrix first.
    """
    if state.n_qubits != circuit.n_qubits:
        raise ValueError("state and circuit register sizes differ")
    n = state.n_qubits
    current = state
    data = current.data.copy()
    kind = current.kind
    for gate in circuit.gates:
        if gate.kind == "DepolarizeTwoQubit":
            if kind == "pure":
                data = np.outer(data, data.conj())
                kind = "mixed"
            tmp = QuantumState(n, "mixed", data, validate=False)
            data = depolarize_two_qubit(tmp, gate.targets[0], gate.targets[1],
                                        gate.angle).data
            continue
        if gate.kind == "RPauliString" and set(gate.letters) == {"I"}:
            # pure identity-string rotation is a global phase
            if kind == "pure":
                data = data * np.exp(-1j * gate.angle)
            continue
        mat = gate_unitary(gate)
        if kind == "pure":
            data = _apply_unitary_pure(data, mat, gate.targets, n)
        else:
            data = _apply_unitary_mixed(data, mat, gate.targets, n)
    return QuantumState(n, kind, data, validate=False)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of a channel-free circuit."""
    if circuit.n_qubits > MATRIX_QUBIT_CAP:
        raise ValueError(f"dense matrix cap is {MATRIX_QUBIT_CAP} qubits")
    n = circuit.n_qubits
    dim = 1 << n
    mat = np.eye(dim, dtype=complex)
    tensor = mat.reshape((2,) * n + (dim,))
    for gate in circuit.gates:
        if gate.kind == "DepolarizeTwoQubit":
            raise ValueError("circuit contains a noise channel; no unitary exists")
        if gate.kind == "RPauliString" and set(gate.letters) == {"I"}:
            tensor = tensor * np.exp(-1j * gate.angle)
            continue
        axes = tuple(t - 1 for t in gate.targets)
        tensor = _apply_on_axes(tensor, gate_unitary(gate), axes, n + 1)
    return tensor.reshape(dim, dim)


def three_body_rotation_gates(targets: tuple[int, int, int], letters: str,
                              angle: float) -> list[Gate]:
    """R_P(angle) for a three-letter Pauli string, as three two-body gates.

    Single-qubit basis changes map the outer letters onto Z, a CNOT folds
    the first qubit onto the middle one, and the remaining two-body ZZ
    rotation carries the angle.  The middle letter must be Z.
    """
    a, b, c = targets
    if len(letters) != 3 or letters[1] != "Z":
        raise ValueError("expected a three-letter string with a middle Z")
    pre: list[Gate] = []
    post: list[Gate] = []
    for q, letter in ((a, letters[0]), (c, letters[2])):
        if letter == "X":
            pre.append(ry(q, -np.pi / 4))
            post.append(ry(q, np.pi / 4))
        elif letter == "Y":
            pre.append(rx(q, np.pi / 4))
            post.append(rx(q, -np.pi / 4))
        elif letter != "Z":
            raise ValueError("outer letters must be X, Y, or Z")
    return pre + [cnot(a, b), rpauli((b, c), "ZZ", angle), cnot(a, b)] + post


# -- measurement-side operations --------------------------------------------------


def expectation(state: QuantumState, obs: OperatorSum) -> float:
    """<O> on a pure state or Tr(rho O); the observable must be Hermitian."""
    if not obs.hermitian():
        raise ValueError("observable has complex coefficients; not Hermitian")
    if obs.n_qubits != state.n_qubits:
        raise ValueError("observable register size mismatch")
    if state.kind == "pure":
        if state.n_qubits <= MATRIX_QUBIT_CAP:
            val = complex(np.vdot(state.data, to_dense(obs) @ state.data))
        else:
            val = complex(np.vdot(state.data, obs.apply_statevector(state.data)))
    else:
        val = complex(np.trace(state.data @ to_dense(obs)))
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def sample_bitstrings(state: QuantumState, shots: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Multinomial readout histogram over basis indices (length 2^n)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    return rng.multinomial(shots, probs)
