"""Configuration-driven experiment runner.

Subcommands reproduce the library's headline experiments as CSV data:
singlet dimensions, projector diagonals, projected thermal observables,
noisy trotter evolution with mitigation, variational thermal/ground
states, and singlet entropy.  All randomness is seeded explicitly; a
fixed default seed keeps every run reproducible.  Worker count for grid
sweeps comes from the SINGLETSIM_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dynamics, models, oracle, projection, thermo, variational
from .exceptions import SingletSimError
from .operators import OperatorSum
from .simulator import QuantumState

DEFAULT_SEED = 1234


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def parse_grid(text: str) -> list[float]:
    """Parse ``start:stop:step`` (endpoints inclusive to 1e-9) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(max(n, 1))]


def load_config_args(path: str) -> list[str]:
    """Turn a key-value config file into a flag list (flags given on the
    command line override because argparse keeps the last occurrence)."""
    args: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, value = (s.strip() for s in line.split("=", 1))
            else:
                key, _, value = line.partition(" ")
                key, value = key.strip(), value.strip()
            if not key or not value:
                raise ValueError(f"malformed config line: {raw.rstrip()}")
            args += [f"--{key.replace('_', '-')}", value]
    return args


def _spec_from_args(args: argparse.Namespace) -> models.ModelSpec:
    return models.ModelSpec(group=args.group, n_sites=args.sites,
                            mass=args.m, coupling_sq=args.g2,
                            chem_potential=getattr(args, "mu_fixed", 0.0))


def _observable(spec: models.ModelSpec, name: str) -> OperatorSum:
    if name == "electric":
        return spec.coupling_sq * models.build_component(spec, "electric")
    if name == "mass":
        return spec.mass * models.build_component(spec, "mass")
    if name == "energy":
        return models.build_hamiltonian(spec)
    raise ValueError(f"unknown observable {name!r}")


def _write_output(args: argparse.Namespace, header_cols: list[str],
                  rows: list[list[str]], config_line: str) -> None:
    lines = [f"# {config_line}", ",".join(header_cols)]
    lines += [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_line(args: argparse.Namespace, keys: list[str]) -> str:
    parts = [args.command]
    for key in keys:
        parts.append(f"{key}={getattr(args, key)}")
    return "singletsim " + " ".join(parts)


def _n_workers() -> int:
    try:
        return max(1, int(os.environ.get("SINGLETSIM_WORKERS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items: list) -> list:
    """Map over grid points, in order, optionally on a process pool."""
    workers = _n_workers()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- subcommand implementations ---------------------------------------------------


def _cmd_dim(args: argparse.Namespace) -> int:
    spec = models.ModelSpec(group=args.group, n_sites=args.sites)
    dim = projection.singlet_dimension(spec)
    text = f"{dim:.10g}"
    print(text)
    if args.out:
        _write_output(args, ["group", "n_sites", "dimension"],
                      [[args.group, str(args.sites), text]],
                      _config_line(args, ["group", "sites"]))
    return 0


def _cmd_kdiag(args: argparse.Namespace) -> int:
    spec = models.ModelSpec(group=args.group, n_sites=args.sites)
    values = projection.k_diagonal(spec).diag.values.real
    rows = [[str(i), _fmt(v)] for i, v in enumerate(values)]
    _write_output(args, ["basis_index", "value"], rows,
                  _config_line(args, ["group", "sites"]))
    return 0


def _gibbs_point(task):
    spec_args, mu, temperature, obs_name = task
    spec = models.ModelSpec(group=spec_args[0], n_sites=spec_args[1],
                            mass=spec_args[2], coupling_sq=spec_args[3],
                            chem_potential=mu)
    obs = _observable(spec, obs_name)
    rho = oracle.gibbs_state(spec, temperature)
    k = projection.k_diagonal(spec)
    projected = projection.singlet_expectation(rho, obs, k)
    p0 = projection.oracle_p0(spec)
    from .operators import to_dense
    weight = float(np.real(np.trace(rho.data @ p0)))
    oracle_val = float(np.real(np.trace(rho.data @ to_dense(obs) @ p0)) / weight)
    raw = float(np.real(np.trace(rho.data @ to_dense(obs))))
    return mu, projected, oracle_val, raw


def _cmd_gibbs_observable(args: argparse.Namespace) -> int:
    mus = parse_grid(args.mu)
    tasks = [((args.group, args.sites, args.m, args.g2), mu, args.T, args.obs)
             for mu in mus]
    results = _pmap(_gibbs_point, tasks)
    rows = [[_fmt(mu), _fmt(p), _fmt(o), _fmt(r)] for mu, p, o, r in results]
    _write_output(args, ["mu", "projected", "oracle", "unprojected"], rows,
                  _config_line(args, ["group", "sites", "T", "mu", "obs", "m", "g2"]))
    return 0


def _cmd_evolve(args: argparse.Namespace) -> int:
    spec = models.ModelSpec(group=args.group, n_sites=args.sites, mass=args.m,
                            coupling_sq=args.g2, chem_potential=0.0)
    obs = _observable(spec, args.obs)
    initial = QuantumState.from_bitstring("0011")
    run = dynamics.evolve(spec, initial, args.dt, args.steps, args.lam, obs)
    r_series = dynamics.r_of_t(run)
    rows = []
    for rec, (_, r) in zip(run.records, r_series):
        rows.append([_fmt(rec.t), _fmt(rec.raw_obs), _fmt(rec.mitigated_obs),
                     _fmt(rec.tr_rho_k), _fmt(r), _fmt(rec.fidelity_raw),
                     _fmt(rec.fidelity_proj)])
    _write_output(args, ["t", "raw", "mitigated", "tr_rho_k", "R",
                         "fid_raw", "fid_proj"], rows,
                  _config_line(args, ["group", "sites", "m", "g2", "dt",
                                      "steps", "lam", "obs"]))
    return 0


def _vqt_point(task):
    spec_args, mu, temperature, trials, max_evals, seed, point_index = task
    spec = models.ModelSpec(group=spec_args[0], n_sites=spec_args[1],
                            mass=spec_args[2], coupling_sq=spec_args[3],
                            chem_potential=mu)
    rng = np.random.default_rng([seed, point_index])
    config = variational.OptimizerConfig(n_trials=trials, max_evals=max_evals)
    out = variational.vqt_optimize(spec, temperature, config, rng)
    obs = _observable(spec, "electric")
    k = projection.k_diagonal(spec)
    rows = []
    for i, trial in enumerate(out.trials):
        ansatz = variational.vqt_ansatz_from_params(trial.params)
        rho = variational.vqt_density_matrix(ansatz, spec)
        from .simulator import expectation
        raw = expectation(rho, obs)
        proj = projection.singlet_expectation(rho, obs, k)
        rows.append((mu, i, trial.cost, raw, proj))
    return rows, out.history


def _cmd_vqt(args: argparse.Namespace) -> int:
    mus = parse_grid(args.mu)
    tasks = [((args.group, args.sites, args.m, args.g2), mu, args.T,
              args.trials, args.max_evals, args.seed, i)
             for i, mu in enumerate(mus)]
    results = _pmap(_vqt_point, tasks)
    rows = []
    for point_rows, _ in results:
        for mu, i, cost, raw, proj in point_rows:
            rows.append([_fmt(mu), str(i), _fmt(cost), _fmt(raw), _fmt(proj)])
    _write_output(args, ["mu", "trial", "free_energy", "e_el_raw", "e_el_projected"],
                  rows, _config_line(args, ["group", "sites", "T", "mu",
                                            "trials", "max_evals", "seed"]))
    if args.history_out:
        lines = [f"# {_config_line(args, ['T', 'mu', 'trials', 'seed'])}",
                 "eval,cost,best_cost"]
        for point_rows, history in results:
            mu = point_rows[0][0]
            for ev, cost, best in history:
                lines.append(f"{_fmt(mu)},{int(ev)},{_fmt(cost)},{_fmt(best)}")
        lines[1] = "mu,eval,cost,best_cost"
        with open(args.history_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def _vqe_point(task):
    spec_args, lam, trials, max_evals, seed, point_index = task
    spec = models.ModelSpec(group=spec_args[0], n_sites=spec_args[1],
                            mass=spec_args[2], coupling_sq=spec_args[3])
    rng = np.random.default_rng([seed, point_index])
    config = variational.OptimizerConfig(n_trials=trials, max_evals=max_evals)
    out = variational.vqe_optimize(spec, lam, config, rng)
    e_exact, _ = oracle.ground_state(spec)
    return lam, out.energy_raw, out.energy_csm, e_exact


def _cmd_vqe(args: argparse.Namespace) -> int:
    lams = parse_grid(args.lam)
    tasks = [((args.group, args.sites, args.m, args.g2), lam, args.trials,
              args.max_evals, args.seed, i) for i, lam in enumerate(lams)]
    results = _pmap(_vqe_point, tasks)
    rows = [[_fmt(lam), _fmt(er), _fmt(ec), _fmt(ee)]
            for lam, er, ec, ee in results]
    _write_output(args, ["lambda", "energy_raw", "energy_csm", "energy_exact"],
                  rows, _config_line(args, ["group", "sites", "m", "g2", "lam",
                                            "trials", "max_evals", "seed"]))
    return 0


def _entropy_point(task):
    (spec_args, mu, temperature, estimator, state_kind, samples, trials,
     max_evals, seed, point_index) = task
    spec = models.ModelSpec(group=spec_args[0], n_sites=spec_args[1],
                            mass=spec_args[2], coupling_sq=spec_args[3],
                            chem_potential=mu)
    if state_kind == "gibbs":
        rho = oracle.gibbs_state(spec, temperature)
        s_red = None
    else:
        rng = np.random.default_rng([seed, point_index, 777])
        config = variational.OptimizerConfig(max_evals=max_evals)
        out = variational.vqt_optimize(spec, temperature, config, rng)
        ansatz = variational.vqt_ansatz_from_params(out.best_params)
        rho = variational.vqt_density_matrix(ansatz, spec)
        s_red = variational.analytic_entropy(ansatz.thetas)
    if estimator == "exact":
        est = thermo.singlet_entropy_exact(rho, spec, temperature,
                                           reducible_entropy=s_red)
        return mu, est.s0, est.std_err, est.k_mean, est.hk_mean
    if trials == 1:
        rng = np.random.default_rng([seed, point_index])
        est = thermo.singlet_entropy_mc(rho, spec, temperature, samples, rng)
        return mu, est.s0, est.std_err, est.k_mean, est.hk_mean
    # trial-repeat protocol: independent seeds, empirical std-dev
    values, kms, hkms = [], [], []
    for t in range(trials):
        rng = np.random.default_rng([seed, point_index, t])
        est = thermo.singlet_entropy_mc(rho, spec, temperature, samples, rng,
                                        reducible_entropy=s_red)
        values.append(est.s0)
        kms.append(est.k_mean)
        hkms.append(est.hk_mean)
    return (mu, float(np.mean(values)), float(np.std(values, ddof=1)),
            float(np.mean(kms)), float(np.mean(hkms)))


def _cmd_entropy(args: argparse.Namespace) -> int:
    mus = parse_grid(args.mu)
    tasks = [((args.group, args.sites, args.m, args.g2), mu, args.T,
              args.estimator, args.state, args.samples, args.trials,
              args.max_evals, args.seed, i)
             for i, mu in enumerate(mus)]
    results = _pmap(_entropy_point, tasks)
    rows = [[_fmt(mu), _fmt(args.T), _fmt(s0), _fmt(err), _fmt(km), _fmt(hkm)]
            for mu, s0, err, km, hkm in results]
    _write_output(args, ["mu", "T", "s0", "s0_err", "k_mean", "hk_mean"], rows,
                  _config_line(args, ["group", "sites", "T", "mu", "estimator",
                                      "state", "samples", "trials", "seed"]))
    return 0


# -- parser ------------------------------------------------------------------------


def _add_model_flags(p: argparse.ArgumentParser, sites_default: int = 2) -> None:
    p.add_argument("--group", choices=models.GROUPS, default="su2")
    p.add_argument("--sites", type=int, default=sites_default)
    p.add_argument("--m", type=float, default=0.5, help="mass parameter")
    p.add_argument("--g2", type=float, default=0.5, help="coupling squared")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singletsim",
        description="charge-singlet projection experiments on small lattice "
                    "gauge models")
    parser.add_argument("--config", help="key-value config file; command-line "
                                         "flags override file entries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", help="singlet-subspace dimension")
    p.add_argument("--group", choices=models.GROUPS, required=True)
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser("kdiag", help="projector diagonal as CSV")
    p.add_argument("--group", choices=models.GROUPS, required=True)
    p.add_argument("--sites", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_kdiag)

    p = sub.add_parser("gibbs-observable",
                       help="projected thermal observable vs chemical potential")
    _add_model_flags(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--mu", required=True, help="grid start:stop:step or value")
    p.add_argument("--obs", choices=("electric", "mass", "energy"),
                   default="electric")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gibbs_observable)

    p = sub.add_parser("evolve", help="trotter evolution with mitigation")
    _add_model_flags(p)
    p.add_argument("--dt", type=float, default=0.25)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0,
                   help="two-qubit depolarizing strength")
    p.add_argument("--obs", choices=("electric", "mass", "energy"),
                   default="mass")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("vqt", help="variational thermal state + projection")
    _add_model_flags(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--max-evals", type=int, default=2000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.add_argument("--history-out")
    p.set_defaults(func=_cmd_vqt)

    p = sub.add_parser("vqe", help="variational ground state + projection")
    _add_model_flags(p)
    p.add_argument("--lambda", dest="lam", required=True,
                   help="noise strength grid start:stop:step or value")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--max-evals", type=int, default=2000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_vqe)

    p = sub.add_parser("entropy", help="charge-singlet entropy")
    _add_model_flags(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--estimator", choices=("exact", "mc"), default="exact")
    p.add_argument("--state", choices=("gibbs", "vqt"), default="gibbs")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--trials", type=int, default=1,
                   help="for mc: independent sampling repeats (std-dev error bar)")
    p.add_argument("--max-evals", type=int, default=2000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_entropy)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # inject config-file entries after the subcommand so explicit flags win
    try:
        if "--config" in argv:
            i = argv.index("--config")
            path = argv[i + 1]
            del argv[i:i + 2]
            if not argv:
                raise ValueError("--config given but no command")
            argv = [argv[0]] + load_config_args(path) + argv[1:]
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code in (0, None) else 1
        # reject impossible sizes up front with a clear message
        spec_probe = getattr(args, "sites", None)
        if spec_probe is not None:
            group = getattr(args, "group", "su2")
            n_qubits = (2 if group == "su2" else 3) * args.sites
            cap = 20 if args.command in ("dim", "kdiag") else 12
            if n_qubits > cap:
                print(f"error: {group} with {args.sites} sites needs "
                      f"{n_qubits} qubits, above the dense cap for "
                      f"'{args.command}'", file=sys.stderr)
                return 1
    except (ValueError, OSError, IndexError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except SingletSimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
