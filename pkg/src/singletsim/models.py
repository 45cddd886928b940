"""Qubit Hamiltonians, conserved charges, and reference singlet states.

Implements (1+1)-D SU(2) and SU(3) lattice gauge models with staggered
fermions, open boundaries, and the gauge links integrated out.  A spatial
site carries one qubit per color component (2 for SU(2), 3 for SU(3));
odd staggered sites host antiparticles, even sites particles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import OperatorSum

SU2 = "su2"
SU3 = "su3"
GROUPS = (SU2, SU3)

_COLORS = {SU2: 2, SU3: 3}


@dataclass(frozen=True)
class ModelSpec:
    """Gauge group, lattice size, and couplings; the single source of truth
    for every operator builder."""

    group: str
    n_sites: int
    mass: float = 0.5
    coupling_sq: float = 0.5
    chem_potential: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "group", str(self.group).lower())
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}, got {self.group!r}")
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")

    @property
    def n_colors(self) -> int:
        return _COLORS[self.group]

    @property
    def n_qubits(self) -> int:
        return self.n_colors * self.n_sites


# -- single-qubit building blocks ---------------------------------------------


def _z(n: int, q: int) -> OperatorSum:
    letters = ["I"] * n
    letters[q - 1] = "Z"
    return OperatorSum(n, {"".join(letters): 1.0})


def _ladder(n: int, q: int, sign: int) -> OperatorSum:
    """sigma^+ (sign=+1) or sigma^- (sign=-1) on qubit q, as X/Y strings."""
    x = ["I"] * n
    x[q - 1] = "X"
    y = ["I"] * n
    y[q - 1] = "Y"
    return OperatorSum(n, {"".join(x): 0.5, "".join(y): 0.5j * sign})


def _sp(n: int, q: int) -> OperatorSum:
    return _ladder(n, q, +1)


def _sm(n: int, q: int) -> OperatorSum:
    return _ladder(n, q, -1)


def _prod(*ops: OperatorSum) -> OperatorSum:
    out = ops[0]
    for o in ops[1:]:
        out = out @ o
    return out


def _hc(op: OperatorSum) -> OperatorSum:
    return op + op.dagger()


# -- Hamiltonian builders -------------------------------------------------------

COMPONENTS = ("kin", "mass", "electric", "chem")


def build_component(spec: ModelSpec, which: str) -> OperatorSum:
    """One Hamiltonian term without its coupling prefactor.

    ``which`` is one of ``kin``, ``mass``, ``electric``, ``chem``.  The
    assembled Hamiltonian is ``kin + m*mass + g^2*electric - mu*chem``.
    """
    if which not in COMPONENTS:
        raise ValueError(f"unknown component {which!r}; expected one of {COMPONENTS}")
    if spec.group == SU2:
        return _SU2_BUILDERS[which](spec)
    return _SU3_BUILDERS[which](spec)


def _su2_kin(spec: ModelSpec) -> OperatorSum:
    n = spec.n_qubits
    total = OperatorSum.zero(n)
    for s in range(1, spec.n_sites):
        a = 2 * s - 1
        hop1 = _prod(_sp(n, a), _z(n, a + 1), _sm(n, a + 2))
        hop2 = _prod(_sp(n, a + 1), _z(n, a + 2), _sm(n, a + 3))
        total = total + _hc(hop1) + _hc(hop2)
    return -0.5 * total


def _su2_mass(spec: ModelSpec) -> OperatorSum:
    n = spec.n_qubits
    total = OperatorSum.identity(n, coeff=float(spec.n_sites))
    for s in range(1, spec.n_sites + 1):
        stag = 0.5 * (-1.0) ** s
        total = total + stag * (_z(n, 2 * s - 1) + _z(n, 2 * s))
    return total


def _su2_electric(spec: ModelSpec) -> OperatorSum:
    n = spec.n_qubits
    nsites = spec.n_sites
    total = OperatorSum.zero(n)
    for s in range(1, nsites):
        w = float(nsites - s)
        zz = _z(n, 2 * s - 1) @ _z(n, 2 * s)
        total = total + (3.0 / 8.0) * w * (OperatorSum.identity(n) - zz)
    for s in range(1, nsites - 1):
        for t in range(s + 1, nsites):
            w = float(nsites - t)
            dz_s = _z(n, 2 * s - 1) - _z(n, 2 * s)
            dz_t = _z(n, 2 * t - 1) - _z(n, 2 * t)
            total = total + (w / 8.0) * (dz_s @ dz_t)
            flip = _prod(_sp(n, 2 * s - 1), _sm(n, 2 * s),
                         _sp(n, 2 * t), _sm(n, 2 * t - 1))
            total = total + w * _hc(flip)
    return total


def _su2_chem(spec: ModelSpec) -> OperatorSum:
    n = spec.n_qubits
    total = OperatorSum.zero(n)
    for q in range(1, n + 1):
        total = total + _z(n, q)
    return 0.25 * total


def _su3_kin(spec: ModelSpec) -> OperatorSum:
    n = spec.n_qubits
    total = OperatorSum.zero(n)
    for s in range(1, spec.n_sites):
        a = 3 * s - 2
        stag = (-1.0) ** s
        hop1 = _prod(_sp(n, a), _z(n, a + 1), _z(n, a + 2), _sm(n, a + 3))
        hop2 = _prod(_sp(n, a + 1), _z(n, a + 2), _z(n, a + 3), _sm(n, a + 4))
        hop3 = _prod(_sp(n, a + 2), _z(n, a + 3), _z(n, a + 4), _sm(n, a + 5))
        total = total + stag * (_hc(hop1) - _hc(hop2) + _hc(hop3))
    return 0.5 * total


def _su3_mass(spec: ModelSpec) -> OperatorSum:
    n = spec.n_qubits
    total = OperatorSum.identity(n, coeff=1.5 * spec.n_sites)
    for s in range(1, spec.n_sites + 1):
        stag = 0.5 * (-1.0) ** s
        total = total + stag * (
            _z(n, 3 * s - 2) + _z(n, 3 * s - 1) + _z(n, 3 * s))
    return total


def _su3_electric(spec: ModelSpec) -> OperatorSum:
    n = spec.n_qubits
    nsites = spec.n_sites
    total = OperatorSum.zero(n)
    for s in range(1, nsites):
        w = float(nsites - s)
        a = 3 * s - 2
        pair_sum = (_z(n, a) @ _z(n, a + 1) + _z(n, a) @ _z(n, a + 2)
                    + _z(n, a + 1) @ _z(n, a + 2))
        total = total + (w / 3.0) * (OperatorSum.identity(n, 3.0) - pair_sum)
    for s in range(1, nsites - 1):
        for t in range(s + 1, nsites):
            w = float(nsites - t)
            a, b = 3 * s - 2, 3 * t - 2
            stag = (-1.0) ** (s + t)
            ff1 = _prod(_sp(n, a), _sm(n, a + 1), _sp(n, b + 1), _sm(n, b))
            ff2 = _prod(_sp(n, a + 1), _sm(n, a + 2), _sm(n, b + 1), _sp(n, b + 2))
            total = total + w * stag * (_hc(ff1) + _hc(ff2))
            ff3 = _prod(_sp(n, a), _z(n, a + 1), _sm(n, a + 2),
                        _sm(n, b), _z(n, b + 1), _sp(n, b + 2))
            total = total + w * _hc(ff3)
            za, zb, zc = _z(n, a), _z(n, a + 1), _z(n, a + 2)
            total = total - (w / 12.0) * (
                _z(n, b) @ (zb + zc - 2.0 * za)
                + _z(n, b + 1) @ (zc + za - 2.0 * zb)
                + _z(n, b + 2) @ (za + zb - 2.0 * zc))
    return total


def _su3_chem(spec: ModelSpec) -> OperatorSum:
    n = spec.n_qubits
    total = OperatorSum.zero(n)
    for q in range(1, n + 1):
        total = total + _z(n, q)
    return (1.0 / 6.0) * total


_SU2_BUILDERS = {"kin": _su2_kin, "mass": _su2_mass,
                 "electric": _su2_electric, "chem": _su2_chem}
_SU3_BUILDERS = {"kin": _su3_kin, "mass": _su3_mass,
                 "electric": _su3_electric, "chem": _su3_chem}


def build_hamiltonian(spec: ModelSpec) -> OperatorSum:
    """H = H_kin + m H_m + g^2 H_el - mu H_chem."""
    return (build_component(spec, "kin")
            + spec.mass * build_component(spec, "mass")
            + spec.coupling_sq * build_component(spec, "electric")
            - spec.chem_potential * build_component(spec, "chem"))


# -- conserved charges ----------------------------------------------------------


def build_site_charges(spec: ModelSpec, site: int) -> list[OperatorSum]:
    """All color charges of one staggered site (3 for SU(2), 8 for SU(3))."""
    if not 1 <= site <= spec.n_sites:
        raise ValueError("site out of range")
    n = spec.n_qubits
    if spec.group == SU2:
        a = 2 * site - 1
        qx = 0.5 * _hc(_prod(_sp(n, a), _sm(n, a + 1)))
        qy = 0.5j * (_prod(_sm(n, a), _sp(n, a + 1))
                     - _prod(_sp(n, a), _sm(n, a + 1)))
        qz = 0.25 * (_z(n, a) - _z(n, a + 1))
        return [qx, qy, qz]
    a = 3 * site - 2
    stag = (-1.0) ** site
    q1 = 0.5 * stag * _hc(_prod(_sp(n, a), _sm(n, a + 1)))
    q2 = 0.5j * stag * (_prod(_sp(n, a + 1), _sm(n, a))
                        - _prod(_sm(n, a + 1), _sp(n, a)))
    q3 = 0.25 * (_z(n, a) - _z(n, a + 1))
    q4 = -0.5 * _hc(_prod(_sp(n, a), _z(n, a + 1), _sm(n, a + 2)))
    q5 = 0.5j * (_prod(_sp(n, a), _z(n, a + 1), _sm(n, a + 2))
                 - _prod(_sm(n, a), _z(n, a + 1), _sp(n, a + 2)))
    q6 = 0.5 * stag * _hc(_prod(_sp(n, a + 1), _sm(n, a + 2)))
    q7 = 0.5j * stag * (_prod(_sp(n, a + 2), _sm(n, a + 1))
                        - _prod(_sm(n, a + 2), _sp(n, a + 1)))
    q8 = (1.0 / (4.0 * np.sqrt(3.0))) * (
        _z(n, a) + _z(n, a + 1) - 2.0 * _z(n, a + 2))
    return [q1, q2, q3, q4, q5, q6, q7, q8]


def build_charges(spec: ModelSpec) -> list[OperatorSum]:
    """Total (site-summed) color charges."""
    n_charges = 3 if spec.group == SU2 else 8
    totals = [OperatorSum.zero(spec.n_qubits) for _ in range(n_charges)]
    for site in range(1, spec.n_sites + 1):
        for j, q in enumerate(build_site_charges(spec, site)):
            totals[j] = totals[j] + q
    return totals


def diagonal_weight_integers(spec: ModelSpec) -> tuple[np.ndarray, ...]:
    """Exact integer-scaled diagonal-charge eigenvalues per basis state.

    SU(2): one array with 4*Q^z; SU(3): two arrays with 4*Q^3 and
    4*sqrt(3)*Q^8.  Scaling makes the eigenvalues exact integers so the
    projector's case analysis can use exact comparisons.
    """
    n = spec.n_qubits
    idx = np.arange(1 << n)
    z = np.empty((n, idx.size), dtype=np.int64)
    for q in range(1, n + 1):
        bits = (idx >> (n - q)) & 1
        z[q - 1] = 1 - 2 * bits
    if spec.group == SU2:
        m = np.zeros(idx.size, dtype=np.int64)
        for s in range(1, spec.n_sites + 1):
            m += z[2 * s - 2] - z[2 * s - 1]
        return (m,)
    m3 = np.zeros(idx.size, dtype=np.int64)
    m8 = np.zeros(idx.size, dtype=np.int64)
    for s in range(1, spec.n_sites + 1):
        a = 3 * s - 3
        m3 += z[a] - z[a + 1]
        m8 += z[a] + z[a + 1] - 2 * z[a + 2]
    return m3, m8


# -- unit-cell split and trotter ingredients ------------------------------------


def unit_cell_split(spec: ModelSpec) -> tuple[OperatorSum, OperatorSum]:
    """Split the SU(2) two-site Hamiltonian into diagonal and hopping parts.

    Returns (h_diag, h_nondiag) with h_diag + h_nondiag == the full
    Hamiltonian.  Only defined for SU(2), N=2, mu=0.
    """
    if spec.group != SU2 or spec.n_sites != 2 or spec.chem_potential != 0.0:
        raise ValueError("unit-cell split requires SU(2), N=2, mu=0")
    n = 4
    m, g2 = spec.mass, spec.coupling_sq
    h_diag = (OperatorSum.identity(n, 2.0 * m + 3.0 * g2 / 8.0)
              + 0.5 * m * (_z(n, 3) + _z(n, 4) - _z(n, 1) - _z(n, 2))
              - (3.0 * g2 / 8.0) * (_z(n, 1) @ _z(n, 2)))
    h_nondiag = OperatorSum(n, {
        "XZXI": -0.25, "YZYI": -0.25, "IXZX": -0.25, "IYZY": -0.25})
    return h_diag, h_nondiag


# -- strong-coupling singlet states ----------------------------------------------


@dataclass(frozen=True)
class SingletStateLibrary:
    """Named strong-coupling singlet states on a two-site unit cell."""

    group: str
    states: dict[str, np.ndarray] = field(repr=False)

    def names(self) -> list[str]:
        return list(self.states)


def _state_from_bits(*components: str | tuple[str, float]) -> np.ndarray:
    parts = [(c, 1.0) if isinstance(c, str) else c for c in components]
    n = len(parts[0][0])
    vec = np.zeros(1 << n, dtype=complex)
    for bits, amp in parts:
        vec[int(bits, 2)] = amp
    vec /= np.linalg.norm(vec)
    vec.flags.writeable = False
    return vec


def singlet_library(group: str) -> SingletStateLibrary:
    """Strong-coupling singlet basis states for the N=2 unit cell.

    SU(2) has five states (vac, B, Bbar, M, BbarB); SU(3) adds the
    tetraquark T for six.  The relative sign inside the SU(2) meson is
    fixed by requiring annihilation under the total charges of this
    model's conventions.
    """
    group = str(group).lower()
    if group == SU2:
        states = {
            "vac": _state_from_bits("0011"),
            "B": _state_from_bits("0000"),
            "Bbar": _state_from_bits("1111"),
            "M": _state_from_bits("1001", ("0110", -1.0)),
            "BbarB": _state_from_bits("1100"),
        }
    elif group == SU3:
        states = {
            "vac": _state_from_bits("000111"),
            "B": _state_from_bits("000000"),
            "Bbar": _state_from_bits("111111"),
            "M": _state_from_bits("100011", "010101", "001110"),
            "T": _state_from_bits("110001", "011100", "101010"),
            "BbarB": _state_from_bits("111000"),
        }
    else:
        raise ValueError(f"group must be one of {GROUPS}")
    return SingletStateLibrary(group=group, states=states)
