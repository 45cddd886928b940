"""Exact-diagonalization ground truth.

Gibbs states, ground states, exact time evolution, and exactly projected
thermal quantities, all from a cached spectral decomposition of the dense
Hamiltonian.  Everything downstream is validated against this module.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .exceptions import NearZeroSingletWeight
from .models import ModelSpec, build_hamiltonian
from .operators import to_dense
from .projection import oracle_p0
from .simulator import QuantumState


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and the unitary of eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_dense(cls, matrix: np.ndarray,
                   check: bool = True) -> "SpectralDecomposition":
        eigvals, eigvecs = np.linalg.eigh(matrix)
        if check:
            # probe the reconstruction with a few random vectors instead of
            # forming V L V^dag, which would double the O(n^3) work
            rng = np.random.default_rng(0)
            scale = max(np.linalg.norm(eigvals, np.inf), 1e-300)
            for _ in range(3):
                x = rng.normal(size=matrix.shape[0])
                x /= np.linalg.norm(x)
                err = np.linalg.norm(
                    matrix @ x - eigvecs @ (eigvals * (eigvecs.conj().T @ x)))
                if err > 1e-9 * scale:
                    raise AssertionError("spectral reconstruction failed")
        return cls(eigenvalues=eigvals, eigenvectors=eigvecs)


_cache_lock = threading.Lock()
_decomposition_cache: dict[ModelSpec, SpectralDecomposition] = {}
_p0_cache: dict[ModelSpec, np.ndarray] = {}


def hamiltonian_decomposition(spec: ModelSpec) -> SpectralDecomposition:
    """Cached spectral decomposition of the model Hamiltonian."""
    dec = _decomposition_cache.get(spec)
    if dec is None:
        dec = SpectralDecomposition.from_dense(to_dense(build_hamiltonian(spec)))
        with _cache_lock:
            _decomposition_cache.setdefault(spec, dec)
    return dec


def _cached_p0(spec: ModelSpec) -> np.ndarray:
    p0 = _p0_cache.get(spec)
    if p0 is None:
        p0 = oracle_p0(spec)
        with _cache_lock:
            _p0_cache.setdefault(spec, p0)
    return p0


def gibbs_state(spec: ModelSpec, temperature: float) -> QuantumState:
    """rho = exp(-H/T)/Z via the spectral decomposition."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    dec = hamiltonian_decomposition(spec)
    weights = np.exp(-(dec.eigenvalues - dec.eigenvalues[0]) / temperature)
    weights /= weights.sum()
    rho = (dec.eigenvectors * weights) @ dec.eigenvectors.conj().T
    return QuantumState.from_density_matrix(rho, validate=False)


def partition_function(spec: ModelSpec, temperature: float) -> float:
    """Z = Tr exp(-H/T) (unshifted; fine at desk-scale energies)."""
    dec = hamiltonian_decomposition(spec)
    return float(np.sum(np.exp(-dec.eigenvalues / temperature)))


def ground_state(spec: ModelSpec,
                 degeneracy_tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Lowest eigenpair; degenerate ties resolve toward the singlet sector.

    If several eigenvectors share the minimal eigenvalue, the one with the
    largest singlet-subspace overlap is projected there and renormalized.
    """
    dec = hamiltonian_decomposition(spec)
    e0 = float(dec.eigenvalues[0])
    close = np.abs(dec.eigenvalues - e0) <= degeneracy_tol * max(1.0, abs(e0))
    candidates = dec.eigenvectors[:, close]
    if candidates.shape[1] == 1:
        return e0, candidates[:, 0].copy()
    p0 = _cached_p0(spec)
    projected = p0 @ candidates
    norms = np.linalg.norm(projected, axis=0)
    best = int(np.argmax(norms))
    if norms[best] < 1e-12:
        return e0, candidates[:, 0].copy()
    return e0, projected[:, best] / norms[best]


def exact_evolve(spec: ModelSpec, state: QuantumState, t: float) -> QuantumState:
    """Propagate a state with exp(-i H t) from the spectral decomposition."""
    dec = hamiltonian_decomposition(spec)
    phases = np.exp(-1j * dec.eigenvalues * t)
    v = dec.eigenvectors
    if state.kind == "pure":
        evolved = v @ (phases * (v.conj().T @ state.data))
        return QuantumState(state.n_qubits, "pure", evolved, validate=False)
    u_rho = v @ ((phases[:, None] * (v.conj().T @ state.data @ v)) * phases.conj()[None, :]) @ v.conj().T
    return QuantumState(state.n_qubits, "mixed", u_rho, validate=False)


def von_neumann_entropy(rho: np.ndarray, clip: float = 1e-15) -> float:
    """-Tr(rho ln rho) with the 0 ln 0 := 0 convention."""
    eigvals = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    eigvals = eigvals[eigvals > clip]
    return float(-np.sum(eigvals * np.log(eigvals)))


def projected_gibbs_quantities(spec: ModelSpec, temperature: float,
                               ) -> tuple[float, float, float]:
    """(energy, entropy, Z0/Z) of the singlet-projected Gibbs state.

    Forms rho_0 = P0 rho P0 / Tr(rho P0) with the exact projector and
    returns Tr(rho_0 H), -Tr(rho_0 ln rho_0), and the weight Tr(rho P0).
    """
    rho = gibbs_state(spec, temperature).data
    p0 = _cached_p0(spec)
    weight = float(np.real(np.trace(rho @ p0)))
    if weight < 1e-12:
        raise NearZeroSingletWeight(
            f"Tr(rho P0) = {weight:.3e}; no singlet support at T={temperature}")
    rho0 = p0 @ rho @ p0 / weight
    h = to_dense(build_hamiltonian(spec))
    energy0 = float(np.real(np.trace(rho0 @ h)))
    entropy0 = von_neumann_entropy(rho0)
    return energy0, entropy0, weight
