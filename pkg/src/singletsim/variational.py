"""Variational thermal-state (VQT) and ground-state (VQE) preparation with
charge-singlet readout.

Neither ansatz enforces the charge constraints: the thermal circuit mixes
product distributions through a shallow entangling layer, and the ground
state circuit works in the vacuum/meson/baryonium span.  Singlet-sector
values are recovered at readout through the diagonal projector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, minimize

from .models import SU2, ModelSpec, build_hamiltonian
from .operators import OperatorSum, to_dense
from .projection import ProjectorK, k_diagonal, singlet_expectation
from .simulator import (Circuit, QuantumState, apply, circuit_unitary, cnot,
                        expectation, ry, rz, three_body_rotation_gates, xgate)

N_ANCILLA = 4
N_SYSTEM_PHIS = 6


@dataclass(frozen=True)
class VqtAnsatz:
    """Thermal ansatz: 4 ancilla rotation angles + 6 system-circuit angles."""

    thetas: np.ndarray
    phis: np.ndarray

    def __post_init__(self) -> None:
        thetas = np.asarray(self.thetas, dtype=float)
        phis = np.asarray(self.phis, dtype=float)
        if thetas.shape != (N_ANCILLA,) or phis.shape != (N_SYSTEM_PHIS,):
            raise ValueError("ansatz needs 4 ancilla and 6 system parameters")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "phis", phis)

    @property
    def n_parameters(self) -> int:
        return self.thetas.size + self.phis.size


@dataclass(frozen=True)
class VqeAnsatz:
    """Ground-state ansatz parameters (two mixing angles)."""

    params: np.ndarray

    def __post_init__(self) -> None:
        params = np.asarray(self.params, dtype=float)
        if params.shape != (2,):
            raise ValueError("the ground-state ansatz has 2 parameters")
        object.__setattr__(self, "params", params)


@dataclass(frozen=True)
class OptimizerConfig:
    """Gradient-free search budget: independent trials of bounded simplex
    descent, each from a fresh random start."""

    n_trials: int = 5
    max_evals: int = 2000
    xatol: float = 1e-9
    fatol: float = 1e-12


@dataclass(frozen=True)
class TrialResult:
    params: np.ndarray
    cost: float


@dataclass(frozen=True)
class OptimizeOutcome:
    """Best parameters plus per-trial results and the evaluation history.

    history rows are (eval_index, cost, best_cost_so_far) across all
    trials in order; improved is False when no trial beat its starting
    point (budget exhausted without progress).
    """

    best_params: np.ndarray
    best_cost: float
    trials: tuple[TrialResult, ...]
    history: np.ndarray = field(repr=False)
    improved: bool = True


def vqt_system_circuit(phis: np.ndarray) -> Circuit:
    """Eigenbasis circuit: two three-body YZX rotations then a Z layer.

    The three-body gates are decomposed into two-body entanglers the same
    way as the trotter circuit, so gate counting and noise attachment work
    identically.
    """
    phis = np.asarray(phis, dtype=float)
    gates = []
    gates += three_body_rotation_gates((1, 2, 3), "YZX", float(phis[4]))
    gates += three_body_rotation_gates((2, 3, 4), "YZX", float(phis[5]))
    gates += [rz(q, float(phis[q - 1])) for q in (1, 2, 3, 4)]
    return Circuit(4, tuple(gates))


def bernoulli_probs(thetas: np.ndarray) -> np.ndarray:
    """Product distribution over 16 bitstrings with p_i(1) = sin^2(theta_i/2)."""
    thetas = np.asarray(thetas, dtype=float)
    p_one = np.sin(thetas / 2.0) ** 2
    probs = np.ones(1 << N_ANCILLA)
    idx = np.arange(1 << N_ANCILLA)
    for i in range(N_ANCILLA):
        bit = (idx >> (N_ANCILLA - 1 - i)) & 1
        probs *= np.where(bit == 1, p_one[i], 1.0 - p_one[i])
    return probs


def vqt_density_matrix(ansatz: VqtAnsatz, spec: ModelSpec) -> QuantumState:
    """rho(theta, phi) = sum_n p_n U(phi)|n><n|U(phi)^dag."""
    if spec.group != SU2 or spec.n_sites != 2:
        raise ValueError("the thermal ansatz is defined on the SU(2) unit cell")
    u = circuit_unitary(vqt_system_circuit(ansatz.phis))
    probs = bernoulli_probs(ansatz.thetas)
    rho = (u * probs) @ u.conj().T
    return QuantumState.from_density_matrix(rho, validate=False)


def analytic_entropy(thetas: np.ndarray) -> float:
    """Entropy of the ancilla product distribution, 0 ln 0 := 0."""
    thetas = np.asarray(thetas, dtype=float)
    c = np.cos(thetas / 2.0) ** 2
    s = np.sin(thetas / 2.0) ** 2

    def xlx(v: np.ndarray) -> np.ndarray:
        return np.where(v > 1e-15, v * np.log(np.clip(v, 1e-300, None)), 0.0)

    return float(-np.sum(xlx(c) + xlx(s)))


def _multi_start(cost, bounds: Bounds, config: OptimizerConfig,
                 rng: np.random.Generator,
                 extra_starts: list[np.ndarray] | None = None) -> OptimizeOutcome:
    history: list[tuple[int, float, float]] = []
    best_so_far = np.inf
    n_eval = 0

    def tracked(x: np.ndarray) -> float:
        nonlocal best_so_far, n_eval
        val = cost(x)
        best_so_far = min(best_so_far, val)
        history.append((n_eval, val, best_so_far))
        n_eval += 1
        return val

    starts = [rng.uniform(bounds.lb, bounds.ub) for _ in range(config.n_trials)]
    starts += list(extra_starts or [])
    trials: list[TrialResult] = []
    improved = False
    for x0 in starts:
        first = tracked(x0)
        res = minimize(tracked, x0, method="Nelder-Mead", bounds=bounds,
                       options={"maxfev": config.max_evals,
                                "xatol": config.xatol, "fatol": config.fatol,
                                "adaptive": True})
        trials.append(TrialResult(params=np.array(res.x), cost=float(res.fun)))
        if res.fun < first - 1e-15:
            improved = True
    best = min(trials, key=lambda t: t.cost)
    return OptimizeOutcome(best_params=best.params, best_cost=best.cost,
                           trials=tuple(trials),
                           history=np.array(history, dtype=float),
                           improved=improved)


def vqt_free_energy(ansatz: VqtAnsatz, spec: ModelSpec, temperature: float,
                    h_dense: np.ndarray | None = None) -> float:
    """F = Tr(rho H) - T S(theta), with the entropy from the ansatz angles."""
    h = to_dense(build_hamiltonian(spec)) if h_dense is None else h_dense
    u = circuit_unitary(vqt_system_circuit(ansatz.phis))
    energies = np.real(np.einsum("ji,jk,ki->i", u.conj(), h, u))
    probs = bernoulli_probs(ansatz.thetas)
    return float(probs @ energies - temperature * analytic_entropy(ansatz.thetas))


_VQT_BOUNDS = Bounds(np.array([0.0] * 4 + [-np.pi] * 6),
                     np.array([np.pi] * 4 + [np.pi] * 6))


def vqt_optimize(spec: ModelSpec, temperature: float,
                 config: OptimizerConfig | None = None,
                 rng: np.random.Generator | None = None) -> OptimizeOutcome:
    """Minimize the free energy over the 10 ansatz parameters.

    Runs config.n_trials independent random-start descents; per-trial
    optima are kept so callers can report trial-to-trial spread.
    """
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    config = config or OptimizerConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    h = to_dense(build_hamiltonian(spec))

    def cost(x: np.ndarray) -> float:
        return vqt_free_energy(VqtAnsatz(x[:4], x[4:]), spec, temperature, h)

    return _multi_start(cost, _VQT_BOUNDS, config, rng)


def vqt_ansatz_from_params(params: np.ndarray) -> VqtAnsatz:
    params = np.asarray(params, dtype=float)
    return VqtAnsatz(thetas=params[:4], phis=params[4:])


# -- ground-state search -----------------------------------------------------------


def vqe_circuit(ansatz: VqeAnsatz | np.ndarray) -> Circuit:
    """Ground-state circuit: X preparations, RY rotations, and CNOTs.

    Prepares cos(t1/2)|vac> + sin(t1/2)cos(t2/2)|M> + sin(t1/2)sin(t2/2)|BbarB>
    on the unit cell: an amplitude cascade on the antiquark pair, a fixed
    Givens rotation that symmetrizes the meson component, and a correlated
    copy onto the quark pair.
    """
    params = ansatz.params if isinstance(ansatz, VqeAnsatz) else np.asarray(ansatz)
    t1, t2 = float(params[0]), float(params[1])
    gates = [ry(1, t1 / 2.0)]
    # controlled-RY(t2) from qubit 1 onto qubit 2
    gates += [ry(2, t2 / 4.0), cnot(1, 2), ry(2, -t2 / 4.0), cnot(1, 2)]
    # Givens(-pi/2) on the {01, 10} subspace of (1, 2)
    gates += [cnot(2, 1), ry(2, -np.pi / 8.0), cnot(1, 2), ry(2, np.pi / 8.0),
              cnot(1, 2), cnot(2, 1)]
    gates += [xgate(3), xgate(4), cnot(1, 3), cnot(2, 4)]
    return Circuit(4, tuple(gates))


def vqe_prepare(ansatz: VqeAnsatz | np.ndarray, lambda_d: float) -> QuantumState:
    """Run the ground-state circuit, noisy when lambda_d > 0."""
    circ = vqe_circuit(ansatz)
    if lambda_d > 0.0:
        circ = circ.with_depolarizing_noise(lambda_d)
    return apply(QuantumState.from_bitstring("0000"), circ)


@dataclass(frozen=True)
class VqeOutcome:
    energy_raw: float
    energy_csm: float
    ansatz: VqeAnsatz
    trials: tuple[TrialResult, ...]
    history: np.ndarray = field(repr=False)
    improved: bool = True


_VQE_BOUNDS = Bounds(np.array([-2.0 * np.pi] * 2), np.array([2.0 * np.pi] * 2))


def vqe_optimize(spec: ModelSpec, lambda_d: float,
                 config: OptimizerConfig | None = None,
                 rng: np.random.Generator | None = None) -> VqeOutcome:
    """Minimize the raw ansatz energy, then report raw and projected values.

    The cost is the unprojected Tr(rho H) of the (possibly noisy) prepared
    state; the singlet correction is applied once, at readout, on the
    optimal state.
    """
    if spec.group != SU2 or spec.n_sites != 2:
        raise ValueError("the ground-state ansatz is defined on the SU(2) unit cell")
    if lambda_d < 0.0:
        raise ValueError("lambda_d must be non-negative")
    config = config or OptimizerConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    h_op = build_hamiltonian(spec)
    k = k_diagonal(spec)

    def cost(x: np.ndarray) -> float:
        return expectation(vqe_prepare(x, lambda_d), h_op)

    # the 2-parameter landscape has more than one basin; seed extra trials
    # from the best points of a deterministic scan
    grid = np.linspace(_VQE_BOUNDS.lb[0], _VQE_BOUNDS.ub[0], 17)
    scan = sorted(((cost(np.array([a, b])), (a, b)) for a in grid for b in grid),
                  key=lambda t: t[0])
    scan_starts = [np.array(p) for _, p in scan[:3]]
    outcome = _multi_start(cost, _VQE_BOUNDS, config, rng,
                           extra_starts=scan_starts)
    ansatz = VqeAnsatz(outcome.best_params)
    state = vqe_prepare(ansatz, lambda_d)
    energy_raw = expectation(state, h_op)
    energy_csm = singlet_expectation(state, h_op, k)
    return VqeOutcome(energy_raw=float(energy_raw), energy_csm=float(energy_csm),
                      ansatz=ansatz, trials=outcome.trials,
                      history=outcome.history, improved=outcome.improved)
