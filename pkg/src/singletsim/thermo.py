"""Charge-singlet thermodynamics.

The singlet entropy of a thermal state follows from reducible-state
averages alone:

    S0 = S + ln<K> + (<H K> - <H><K>) / (T <K>),

where S is the reducible von Neumann entropy and the averages are taken
with the diagonal projector K.  <K> and <H K> may be evaluated exactly
(dense traces against the closed-form K) or by Monte-Carlo averaging of
diagonal group elements over the group measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NearZeroSingletWeight
from .models import SU2, ModelSpec, build_hamiltonian, diagonal_weight_integers
from .operators import to_dense
from .oracle import von_neumann_entropy
from .projection import SINGLET_WEIGHT_THRESHOLD, k_diagonal, sample_group_array
from .simulator import QuantumState


@dataclass(frozen=True)
class EntropyEstimate:
    """Singlet entropy with the reducible averages that produced it."""

    s0: float
    s_reducible: float
    k_mean: float
    hk_mean: float
    h_mean: float
    n_samples: int
    std_err: float

    def __post_init__(self) -> None:
        if self.s0 < -1e-6:
            raise ValueError("singlet entropy must be non-negative")
        if not 0.0 < self.k_mean <= 1.0 + 1e-9:
            raise ValueError("<K> must lie in (0, 1]")
        if self.std_err < 0.0:
            raise ValueError("standard error must be non-negative")


def _density_matrix(rho) -> np.ndarray:
    if isinstance(rho, QuantumState):
        return rho.density_matrix()
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        return np.outer(rho, rho.conj())
    return rho


def _assemble(s_red: float, k_mean: float, hk_mean: float, h_mean: float,
              temperature: float, n_samples: int, std_err: float) -> EntropyEstimate:
    if k_mean < SINGLET_WEIGHT_THRESHOLD:
        raise NearZeroSingletWeight(
            f"<K> = {k_mean:.3e} below threshold {SINGLET_WEIGHT_THRESHOLD:.1e}")
    s0 = s_red + np.log(k_mean) + (hk_mean - h_mean * k_mean) / (temperature * k_mean)
    # a negative value statistically consistent with zero is clamped;
    # anything further negative is a genuine inconsistency
    if -(3.0 * std_err + 1e-9) < s0 < 0.0:
        s0 = 0.0
    return EntropyEstimate(s0=float(s0),
                           s_reducible=float(s_red), k_mean=float(k_mean),
                           hk_mean=float(hk_mean), h_mean=float(h_mean),
                           n_samples=n_samples, std_err=float(std_err))


def singlet_entropy_exact(rho, spec: ModelSpec, temperature: float,
                          reducible_entropy: float | None = None) -> EntropyEstimate:
    """Singlet entropy with <K> and <H K> computed as exact dense traces.

    ``reducible_entropy`` overrides the eigenvalue-based S, for callers
    that know it analytically (e.g. thermal ansatz angles).
    """
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    dm = _density_matrix(rho)
    kv = k_diagonal(spec).diag.values
    h = to_dense(build_hamiltonian(spec))
    s_red = von_neumann_entropy(dm) if reducible_entropy is None \
        else float(reducible_entropy)
    k_mean = float(np.real(np.sum(np.diag(dm) * kv)))
    hk_mean = float(np.real(np.sum(np.diag(dm @ h) * kv)))
    h_mean = float(np.real(np.trace(dm @ h)))
    return _assemble(s_red, k_mean, hk_mean, h_mean, temperature, 0, 0.0)


def singlet_entropy_mc(rho, spec: ModelSpec, temperature: float, n_samples: int,
                       rng: np.random.Generator,
                       reducible_entropy: float | None = None) -> EntropyEstimate:
    """Singlet entropy with <K> and <H K> estimated by group-measure MC.

    Each sample contributes Tr(rho U_d) and Tr(rho H U_d) for one drawn
    diagonal group element; the standard error propagates the joint
    sample covariance through the entropy formula to first order.
    """
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    dm = _density_matrix(rho)
    h = to_dense(build_hamiltonian(spec))
    rho_diag = np.diag(dm)
    rho_h_diag = np.diag(dm @ h)
    s_red = von_neumann_entropy(dm) if reducible_entropy is None \
        else float(reducible_entropy)
    h_mean = float(np.real(np.trace(dm @ h)))

    params = sample_group_array(spec.group, rng, n_samples)
    if spec.group == SU2:
        params = params.reshape(-1, 1)
    # phase matrix: row s holds the diagonal of U_d(sample s)
    if spec.group == SU2:
        (m4,) = diagonal_weight_integers(spec)
        phases = np.exp(1j * np.outer(params[:, 0], m4 / 4.0))
    else:
        m3, m8 = diagonal_weight_integers(spec)
        phases = np.exp(1j * (np.outer(params[:, 0], m3 / 4.0)
                              + np.outer(params[:, 1], m8 / 6.0)))
    k_samples = phases @ rho_diag
    hk_samples = phases @ rho_h_diag

    im_mean = abs(np.mean(k_samples.imag))
    im_sem = np.std(k_samples.imag, ddof=1) / np.sqrt(n_samples)
    if im_mean > 5.0 * im_sem + 1e-9:
        raise ValueError("imaginary part of <K> samples is not consistent with zero")

    x = k_samples.real
    y = hk_samples.real
    k_mean = float(np.mean(x))
    hk_mean = float(np.mean(y))
    cov = np.cov(np.stack([x, y]), ddof=1) / n_samples
    if k_mean < SINGLET_WEIGHT_THRESHOLD:
        raise NearZeroSingletWeight(
            f"<K> = {k_mean:.3e} below threshold {SINGLET_WEIGHT_THRESHOLD:.1e}")
    beta = 1.0 / temperature
    grad = np.array([1.0 / k_mean - beta * hk_mean / k_mean**2,
                     beta / k_mean])
    variance = float(grad @ cov @ grad)
    std_err = float(np.sqrt(max(variance, 0.0)))
    return _assemble(s_red, k_mean, hk_mean, h_mean, temperature,
                     n_samples, std_err)


def z0_over_z(rho, spec: ModelSpec) -> float:
    """Tr(rho K): the singlet share of the partition function for Gibbs rho."""
    dm = _density_matrix(rho)
    kv = k_diagonal(spec).diag.values
    return float(np.real(np.sum(np.diag(dm) * kv)))
