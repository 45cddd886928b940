"""Trotterized time evolution with optional depolarizing noise,
projection-based mitigation, the R(t) diagnostic, and noise-strength
extraction from sigmoid fits of R(t)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, minimize

from .exceptions import FitDiverged
from .models import SU2, ModelSpec, unit_cell_split
from .operators import OperatorSum, to_dense
from .oracle import hamiltonian_decomposition
from .projection import ProjectorK, k_diagonal, singlet_expectation, singlet_weight
from .simulator import (Circuit, Gate, QuantumState, apply, rpauli, rz,
                        three_body_rotation_gates)

#: nondiagonal three-body strings of the unit-cell Hamiltonian, in circuit order
_UNIT_CELL_HOPS = (((1, 2, 3), "XZX"), ((1, 2, 3), "YZY"),
                   ((2, 3, 4), "XZX"), ((2, 3, 4), "YZY"))


def trotter_step_circuit(spec: ModelSpec, dt: float) -> Circuit:
    """One first-order trotter step exp(-i H_diag dt) exp(-i H_nondiag dt)
    for the SU(2) unit cell.

    The four three-body hopping rotations (mutually commuting) come first,
    each decomposed into three two-body gates; the diagonal part follows as
    single-qubit Z rotations, one ZZ rotation, and an identity-string phase.
    Thirteen two-body gates in total.
    """
    if spec.group != SU2 or spec.n_sites != 2 or spec.chem_potential != 0.0:
        raise ValueError("trotter circuit requires the SU(2) unit cell at mu=0")
    m, g2 = spec.mass, spec.coupling_sq
    phi_hop = -dt / 4.0
    gates: list[Gate] = []
    for targets, letters in _UNIT_CELL_HOPS:
        gates.extend(three_body_rotation_gates(targets, letters, phi_hop))
    gates.extend([
        rz(3, m * dt / 2.0), rz(4, m * dt / 2.0),
        rz(1, -m * dt / 2.0), rz(2, -m * dt / 2.0),
        rpauli((1, 2), "ZZ", -3.0 * g2 * dt / 8.0),
        rpauli((1, 2, 3, 4), "IIII", (2.0 * m + 3.0 * g2 / 8.0) * dt),
    ])
    return Circuit(4, tuple(gates))


@dataclass(frozen=True)
class StepRecord:
    t: float
    raw_obs: float
    mitigated_obs: float
    tr_rho_k: float
    fidelity_raw: float
    fidelity_proj: float


@dataclass(frozen=True)
class EvolutionRun:
    spec: ModelSpec
    dt: float
    n_steps: int
    lambda_d: float
    records: tuple[StepRecord, ...] = field(repr=False)

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _reference_states(spec: ModelSpec, psi0: np.ndarray,
                      dt: float, n_steps: int) -> list[np.ndarray]:
    dec = hamiltonian_decomposition(spec)
    v = dec.eigenvectors
    coeffs = v.conj().T @ psi0
    return [v @ (np.exp(-1j * dec.eigenvalues * (k * dt)) * coeffs)
            for k in range(n_steps + 1)]


def _record(state: QuantumState, t: float, observable: OperatorSum,
            k: ProjectorK, psi_ref: np.ndarray) -> StepRecord:
    obs_dense = to_dense(observable)
    if state.kind == "pure":
        raw = float(np.real(np.vdot(state.data, obs_dense @ state.data)))
        fid_raw = float(np.abs(np.vdot(psi_ref, state.data)) ** 2)
    else:
        raw = float(np.real(np.trace(state.data @ obs_dense)))
        fid_raw = float(np.real(np.vdot(psi_ref, state.data @ psi_ref)))
    weight = singlet_weight(state, k)
    mitigated = singlet_expectation(state, observable, k)
    kv = k.diag.values
    if state.kind == "pure":
        fid_proj = float(np.real(np.vdot(kv * psi_ref, state.data)
                                 * np.vdot(state.data, psi_ref)) / weight)
    else:
        fid_proj = float(np.real(np.vdot(kv * psi_ref, state.data @ psi_ref))
                         / weight)
    return StepRecord(t=t, raw_obs=raw, mitigated_obs=mitigated,
                      tr_rho_k=weight, fidelity_raw=fid_raw,
                      fidelity_proj=fid_proj)


def evolve(spec: ModelSpec, initial: QuantumState, dt: float, n_steps: int,
           lambda_d: float, observable: OperatorSum) -> EvolutionRun:
    """Run trotterized evolution, recording raw and mitigated observables.

    With lambda_d > 0 every two-body gate is followed by a two-qubit
    depolarizing channel on its targets and the state is tracked as a
    density matrix.  Fidelities are measured against the exact evolution
    of the (pure) initial state.
    """
    if lambda_d < 0.0:
        raise ValueError("lambda_d must be non-negative")
    if initial.kind != "pure":
        raise ValueError("evolve needs a pure initial state as exact reference")
    step = trotter_step_circuit(spec, dt)
    if lambda_d > 0.0:
        step = step.with_depolarizing_noise(lambda_d)
        state: QuantumState = initial.to_mixed()
    else:
        state = initial
    k = k_diagonal(spec)
    refs = _reference_states(spec, initial.data, dt, n_steps)
    records = [_record(state, 0.0, observable, k, refs[0])]
    for j in range(1, n_steps + 1):
        state = apply(state, step)
        records.append(_record(state, j * dt, observable, k, refs[j]))
    return EvolutionRun(spec=spec, dt=dt, n_steps=n_steps, lambda_d=lambda_d,
                        records=tuple(records))


def r_of_t(run: EvolutionRun) -> np.ndarray:
    """R(t) = 1/Tr(rho(t) K) - 1, as a (n_steps+1, 2) array of (t, R)."""
    t = run.times()
    r = 1.0 / run.column("tr_rho_k") - 1.0
    return np.stack([t, r], axis=1)


@dataclass(frozen=True)
class SigmoidFit:
    """Parameters of f(x) = a / (1 + exp(-b x)) + c and the fit residual."""

    a: float
    b: float
    c: float
    residual: float


# wide enough to express the saturating form a/(1+e^{-bx}) + c with
# f(0) ~ 0 and f(inf) ~ 2.2, which needs a ~ 4.4, c ~ -2.2
_FIT_BOUNDS = Bounds([0.0, 0.0, -4.0], [8.0, 10.0, 1.0])


def _sigmoid(x: np.ndarray, a: float, b: float, c: float) -> np.ndarray:
    return a / (1.0 + np.exp(-np.clip(b * x, -500.0, 500.0))) + c


def fit_sigmoid(series: np.ndarray, n_starts: int = 20,
                max_residual_fraction: float = 0.1) -> SigmoidFit:
    """Least-squares sigmoid fit via multi-start simplex descent.

    ``series`` holds (x, y) rows.  Raises FitDiverged when the best RMS
    residual exceeds ``max_residual_fraction`` of the data range.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 2 or series.shape[1] != 2 or series.shape[0] < 8:
        raise ValueError("series must be (n >= 8, 2) of (x, y) pairs")
    x, y = series[:, 0], series[:, 1]
    y_range = float(np.ptp(y))

    def loss(p):
        return float(np.mean((_sigmoid(x, *p) - y) ** 2))

    rng = np.random.default_rng(20240915)
    lo, hi = _FIT_BOUNDS.lb, _FIT_BOUNDS.ub
    x_scale = max(abs(x).max(), 1e-9)
    starts = [np.array([min(2.0 * y_range, hi[0]), min(2.0 / x_scale, hi[1]),
                        float(np.clip(y.min(), lo[2], hi[2]))])]
    starts += [rng.uniform(lo, hi) for _ in range(n_starts - 1)]
    best = None
    for p0 in starts:
        res = minimize(loss, p0, method="Nelder-Mead", bounds=_FIT_BOUNDS,
                       options={"maxfev": 4000, "xatol": 1e-10, "fatol": 1e-14})
        if best is None or res.fun < best.fun:
            best = res
    a, b, c = best.x
    residual = float(np.sqrt(best.fun))
    if y_range > 0.0 and residual > max_residual_fraction * y_range:
        raise FitDiverged(
            f"sigmoid fit residual {residual:.3g} exceeds "
            f"{max_residual_fraction:.0%} of the data range {y_range:.3g}")
    return SigmoidFit(a=float(a), b=float(b), c=float(c), residual=residual)


def estimate_noise_strength(b_measured: float,
                            calibration: list[tuple[float, float]]) -> float:
    """Invert the least-squares line b(lambda_d) at a measured growth rate."""
    if len(calibration) < 2:
        raise ValueError("need at least two calibration points")
    lam = np.array([p[0] for p in calibration], dtype=float)
    b = np.array([p[1] for p in calibration], dtype=float)
    slope, intercept = np.polyfit(lam, b, 1)
    if abs(slope) < 1e-12 * max(1.0, float(np.abs(b).max())):
        raise ValueError("calibration line has zero slope; cannot invert")
    return float((b_measured - intercept) / slope)
