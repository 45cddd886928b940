"""Pauli-string operator algebra with dense realization for small registers.

Conventions used throughout the package:

* qubits are numbered 1..n, qubit 1 is the leftmost tensor factor and the
  most significant bit of a computational basis index;
* ``|0> = |up>`` so ``sigma^z |0> = +|0>``;
* coefficients with magnitude below :data:`PRUNE_THRESHOLD` are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

PAULI_LETTERS = "IXYZ"

#: coefficients below this magnitude are treated as floating-point dust
PRUNE_THRESHOLD = 1e-14

#: largest register for which a full 2^n x 2^n matrix may be formed
MATRIX_QUBIT_CAP = 14

#: largest register for which 2^n-long vectors (states, diagonals) may be formed
STATE_QUBIT_CAP = 20

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


def _build_product_table() -> dict[tuple[str, str], tuple[complex, str]]:
    table = {}
    for a in PAULI_LETTERS:
        for b in PAULI_LETTERS:
            m = PAULI_MATRICES[a] @ PAULI_MATRICES[b]
            for phase in (1.0, -1.0, 1.0j, -1.0j):
                for c in PAULI_LETTERS:
                    if np.allclose(m, phase * PAULI_MATRICES[c]):
                        table[(a, b)] = (phase, c)
    return table


#: single-qubit product table, (a, b) -> (phase, c) with a.b = phase * c
PAULI_PRODUCT = _build_product_table()


def _check_letters(letters: str) -> None:
    bad = set(letters) - set(PAULI_LETTERS)
    if bad:
        raise ValueError(f"invalid Pauli letters {sorted(bad)} in {letters!r}")
    if not letters:
        raise ValueError("a Pauli string needs at least one qubit")


@dataclass(frozen=True)
class PauliString:
    """An n-qubit tensor product of single-qubit Pauli operators."""

    letters: str

    def __post_init__(self) -> None:
        _check_letters(self.letters)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    def is_diagonal(self) -> bool:
        """True iff the string contains only I and Z factors."""
        return all(c in "IZ" for c in self.letters)

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > MATRIX_QUBIT_CAP:
            raise ValueError(f"dense matrix cap is {MATRIX_QUBIT_CAP} qubits")
        return reduce(np.kron, (PAULI_MATRICES[c] for c in self.letters))

    def __str__(self) -> str:
        return self.letters


def _mask_parity(indices: np.ndarray, mask: int) -> np.ndarray:
    """Parity of popcount(indices & mask), vectorized (registers <= 32 bits)."""
    x = indices & mask
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


def _string_masks(letters: str) -> tuple[int, int, int]:
    """Return (flip mask, phase mask, y count) for a Pauli string.

    The flip mask has a 1 where the letter is X or Y (bit gets toggled);
    the phase mask has a 1 where the letter is Y or Z (sign depends on the
    input bit).  Masks use the same MSB-first encoding as basis indices.
    """
    flip = phase = 0
    n_y = 0
    n = len(letters)
    for k, c in enumerate(letters):
        bit = 1 << (n - 1 - k)
        if c in "XY":
            flip |= bit
        if c in "YZ":
            phase |= bit
        if c == "Y":
            n_y += 1
    return flip, phase, n_y


def apply_pauli_string(letters: str, vec: np.ndarray) -> np.ndarray:
    """Apply a Pauli string to a statevector without building a matrix."""
    n = len(letters)
    if vec.shape != (1 << n,):
        raise ValueError("statevector length does not match the string")
    flip, phase_mask, n_y = _string_masks(letters)
    idx = np.arange(1 << n)
    src = idx ^ flip
    signs = 1.0 - 2.0 * _mask_parity(src, phase_mask)
    return (1.0j**n_y) * signs * vec[src]


class OperatorSum:
    """A weighted sum of Pauli strings on a fixed register.

    Instances are immutable: all algebra returns new objects.  The terms
    mapping never stores coefficients below the prune threshold.
    """

    __slots__ = ("n_qubits", "_terms", "_dense")

    def __init__(self, n_qubits: int, terms: Mapping[str, complex] | None = None,
                 prune: float = PRUNE_THRESHOLD):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = int(n_qubits)
        clean: dict[str, complex] = {}
        for letters, coeff in (terms or {}).items():
            _check_letters(letters)
            if len(letters) != n_qubits:
                raise ValueError(
                    f"string {letters!r} does not act on {n_qubits} qubits")
            c = clean.get(letters, 0.0) + complex(coeff)
            if abs(c) > prune:
                clean[letters] = c
            elif letters in clean:
                del clean[letters]
        self._terms = clean
        self._dense = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "OperatorSum":
        return cls(n_qubits, {"I" * n_qubits: coeff})

    @classmethod
    def zero(cls, n_qubits: int) -> "OperatorSum":
        return cls(n_qubits, {})

    # -- inspection ------------------------------------------------------------

    @property
    def terms(self) -> dict[str, complex]:
        """A copy of the string -> coefficient mapping."""
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, letters: str) -> complex:
        return self._terms.get(letters, 0.0)

    def hermitian(self, tol: float = 1e-12) -> bool:
        """True iff all coefficients are real (Pauli strings are Hermitian)."""
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def is_diagonal(self) -> bool:
        return all(set(s) <= {"I", "Z"} for s in self._terms)

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch in operator addition")
        merged = dict(self._terms)
        for s, c in other._terms.items():
            merged[s] = merged.get(s, 0.0) + c
        return OperatorSum(self.n_qubits, merged)

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "OperatorSum":
        if isinstance(scalar, OperatorSum):
            return multiply(self, scalar)
        return OperatorSum(
            self.n_qubits, {s: c * scalar for s, c in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorSum") -> "OperatorSum":
        return multiply(self, other)

    def dagger(self) -> "OperatorSum":
        return OperatorSum(
            self.n_qubits, {s: c.conjugate() for s, c in self._terms.items()})

    # -- dense / vector realizations --------------------------------------------

    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def apply_statevector(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-free action of the sum on a statevector."""
        if self.n_qubits > STATE_QUBIT_CAP:
            raise ValueError(f"state cap is {STATE_QUBIT_CAP} qubits")
        out = np.zeros_like(vec, dtype=complex)
        for letters, coeff in self._terms.items():
            out += coeff * apply_pauli_string(letters, vec)
        return out

    def __repr__(self) -> str:
        return f"OperatorSum(n_qubits={self.n_qubits}, n_terms={len(self)})"


@dataclass(frozen=True)
class DiagonalOperator:
    """A diagonal operator given by its values over the computational basis."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        n = int(vals.size).bit_length() - 1
        if vals.size != 1 << n or vals.size < 2:
            raise ValueError("diagonal length must be a power of two >= 2")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_qubits(self) -> int:
        return int(self.values.size).bit_length() - 1

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > MATRIX_QUBIT_CAP:
            raise ValueError(f"dense matrix cap is {MATRIX_QUBIT_CAP} qubits")
        return np.diag(self.values)


# -- module-level operations -------------------------------------------------


def add(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    """Term-wise sum of two operator sums (pruned)."""
    return a + b


def multiply(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    """Operator product with Pauli phase tracking."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit-count mismatch in operator product")
    out: dict[str, complex] = {}
    for sa, ca in a._terms.items():
        for sb, cb in b._terms.items():
            phase = ca * cb
            letters = []
            for x, y in zip(sa, sb):
                p, c = PAULI_PRODUCT[(x, y)]
                phase *= p
                letters.append(c)
            key = "".join(letters)
            out[key] = out.get(key, 0.0) + phase
    return OperatorSum(a.n_qubits, out)


def to_dense(a: OperatorSum) -> np.ndarray:
    """Dense 2^n x 2^n matrix of an operator sum (cached on the instance).

    Each Pauli string is a signed permutation, so it is scattered into the
    matrix in O(2^n) instead of being built by Kronecker products.
    """
    if a.n_qubits > MATRIX_QUBIT_CAP:
        raise ValueError(f"dense matrix cap is {MATRIX_QUBIT_CAP} qubits")
    if a._dense is None:
        dim = 1 << a.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        for letters, coeff in a._terms.items():
            flip, phase_mask, n_y = _string_masks(letters)
            signs = 1.0 - 2.0 * _mask_parity(idx, phase_mask)
            mat[idx ^ flip, idx] += coeff * (1.0j**n_y) * signs
        mat.flags.writeable = False
        a._dense = mat
    return a._dense


def fast_walsh_hadamard(vec: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform, Sylvester (bitwise-AND) order."""
    out = np.array(vec, dtype=complex)
    h = 1
    n = out.size
    while h < n:
        out = out.reshape(-1, 2, h)
        a = out[:, 0, :].copy()
        out[:, 0, :] = a + out[:, 1, :]
        out[:, 1, :] = a - out[:, 1, :]
        out = out.reshape(n)
        h *= 2
    return out


def pauli_decompose_diagonal(d: DiagonalOperator,
                             prune: float = PRUNE_THRESHOLD) -> OperatorSum:
    """Exact expansion of a diagonal operator in {I, Z} strings.

    The coefficient of the string with Z's on qubit set S is
    2^-n * sum_b d_b * (-1)^popcount(b & mask(S)), i.e. the Walsh-Hadamard
    transform of the diagonal.
    """
    n = d.n_qubits
    coeffs = fast_walsh_hadamard(d.values) / d.values.size
    terms: dict[str, complex] = {}
    for mask in np.flatnonzero(np.abs(coeffs) > prune):
        letters = format(mask, f"0{n}b").replace("0", "I").replace("1", "Z")
        terms[letters] = coeffs[mask]
    return OperatorSum(n, terms, prune=prune)


def count_diagonal_strings(values: np.ndarray,
                           threshold: float = PRUNE_THRESHOLD) -> int:
    """Number of nonzero {I,Z}-string coefficients of a diagonal, via Walsh."""
    coeffs = fast_walsh_hadamard(np.asarray(values, dtype=complex))
    return int(np.count_nonzero(np.abs(coeffs) / values.size > threshold))


# -- textual serialization ----------------------------------------------------


def operator_to_text(a: OperatorSum) -> str:
    """Serialize as lines ``<coeff_re> <coeff_im> <letters>``."""
    lines = []
    for letters in sorted(a._terms):
        c = a._terms[letters]
        lines.append(f"{c.real:.17g} {c.imag:.17g} {letters}")
    return "\n".join(lines)


def operator_from_text(text: str, n_qubits: int | None = None) -> OperatorSum:
    terms: dict[str, complex] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        re_s, im_s, letters = line.split()
        terms[letters] = terms.get(letters, 0.0) + complex(float(re_s), float(im_s))
    if not terms and n_qubits is None:
        raise ValueError("empty operator text needs an explicit qubit count")
    n = n_qubits if n_qubits is not None else len(next(iter(terms)))
    return OperatorSum(n, terms)
