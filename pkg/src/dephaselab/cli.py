"""Experiment commands: seeded, deterministic, file-emitting.

Every subcommand draws its randomness from one master seed (per-trial
streams are spawned, so ordering and parallelism cannot change the data),
writes its payload with a metadata header, and exits nonzero when a
numerical check fails:

    exit 0  - ran and all internal checks passed
    exit 1  - a verification inequality failed
    exit 2  - usage or configuration error

A JSON config file mirroring the flags may be passed via ``--config``;
explicit flags win over config values and unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import dephaser, expander, pqc, recurrence, reporting
from .qcore import partial_trace, tensor, trace_norm
from .sampling import random_density_matrix, spawn_rngs
from .tolerances import TOL, Tolerances


class CheckFailure(Exception):
    """A verification inequality did not hold."""


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dephaselab",
        description="Dephasing constructions from minimal sources of randomness.")
    parser.add_argument("--config", type=str, default=None,
                        help="JSON file mirroring the flags of the chosen command")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--out", type=str, default=None, help="output path (or prefix)")
        p.add_argument("--deterministic", action="store_true",
                       help="omit the timestamp so outputs are byte-stable")
        p.add_argument("--tol-file", type=str, default=None,
                       help="JSON file with tolerance overrides")

    p = sub.add_parser("dephase", help="exact quantum dephasing residuals")
    p.add_argument("--d", type=int, default=9)
    p.add_argument("--trials", type=int, default=50)
    common(p)

    p = sub.add_parser("classical-dephase", help="clock-mixture dephasing and rank witness")
    p.add_argument("--d", type=int, default=9)
    p.add_argument("--trials", type=int, default=50)
    common(p)

    p = sub.add_parser("transition", help="random majorizing state transitions")
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mode", choices=["quantum", "classical", "both"], default="both")
    common(p)

    p = sub.add_parser("chain", help="dephase several systems with one catalyst")
    p.add_argument("--n", type=int, default=3, help="number of systems")
    p.add_argument("--d", type=int, default=2, help="dimension per system")
    common(p)

    p = sub.add_parser("machine", help="iterated dephasing with imperfect fuel")
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--iters", type=int, default=20)
    common(p)

    p = sub.add_parser("recur", help="stroboscopic maps of the recurrence coupling")
    p.add_argument("--m", type=int, default=3, help="odd ancilla dimension")
    p.add_argument("--kmax", type=int, default=None, help="default 2m")
    common(p)

    p = sub.add_parser("fig3", help="continuous-time robustness sweep")
    p.add_argument("--m", type=_int_list, default=[3, 5, 7], help="comma list of odd m")
    p.add_argument("--samples", type=int, default=64)
    common(p)

    p = sub.add_parser("pqc", help="private-channel transcript")
    p.add_argument("--error", type=str, default=None,
                   help="four bits abcd; omit for a clean transmission")
    p.add_argument("--rounds", type=int, default=8)
    common(p)

    p = sub.add_parser("expander", help="phase-space walk convergence")
    p.add_argument("--e", type=int, default=3, help="odd lattice size")
    p.add_argument("--k", type=int, default=20)
    common(p)

    p = sub.add_parser("bounds", help="noise-dimension lower bounds")
    p.add_argument("--d", type=int, default=9)
    p.add_argument("--epsilon", type=float, default=0.0)
    common(p)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config: {exc}")
    known = set(vars(args))
    unknown = set(data) - known
    if unknown:
        parser.error(f"unknown config fields: {sorted(unknown)}")
    # flags given explicitly on the command line win over the config file
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, val in data.items():
        if key not in given:
            setattr(args, key, val)
    return args


def _outpath(args, default_name: str) -> Path:
    return Path(args.out) if args.out else Path(default_name)


def _tol(args) -> Tolerances:
    return Tolerances.from_json(args.tol_file) if args.tol_file else TOL


# ---------------------------------------------------------------------------
# Command bodies
# ---------------------------------------------------------------------------

def cmd_dephase(args, tol: Tolerances) -> None:
    d = args.d
    channel = dephaser.build_dephasing_unitary(d, tol=tol)
    u, m = channel.dilation
    rows = []
    for trial, rng in enumerate(spawn_rngs(args.seed, args.trials)):
        rho = random_density_matrix(d, rng)
        joint = u @ tensor(rho, np.eye(m) / m) @ u.conj().T
        sys_res = trace_norm(partial_trace(joint, (d, m), [0]) - dephaser.pinch(rho))
        anc_res = trace_norm(partial_trace(joint, (d, m), [1]) - np.eye(m) / m)
        rows.append(f"{d},{trial},{sys_res:.16e},{anc_res:.16e}")
        if sys_res > tol.dephasing_residual or anc_res > tol.catalyst_residual:
            raise CheckFailure(f"residual above tolerance at trial {trial}")
    meta = reporting.metadata("dephase", args.seed, tol, args.deterministic)
    meta["d"], meta["m"], meta["trials"] = d, m, args.trials
    reporting.write_csv(_outpath(args, "dephase.csv"), meta,
                        "d,trial,system_residual,ancilla_residual", rows)


def cmd_classical_dephase(args, tol: Tolerances) -> None:
    d = args.d
    channel = dephaser.classical_dephasing_channel(d)
    rows = []
    for trial, rng in enumerate(spawn_rngs(args.seed, args.trials)):
        rho = random_density_matrix(d, rng)
        res = trace_norm(channel.apply(rho) - dephaser.pinch(rho))
        rows.append(f"{d},{trial},{res:.16e}")
        if res > tol.dephasing_residual:
            raise CheckFailure(f"residual above tolerance at trial {trial}")
    # rank witness: a mixture one unitary short cannot reach full rank
    from .weylops import clock_z
    z = clock_z(d)
    truncated = dephaser.NoisyChannel(
        kind="classical-mixture", dim=d,
        mixture=tuple(np.linalg.matrix_power(z, j + 1) for j in range(d - 1)))
    rank, m_trunc = bounds_mod.rank_witness(truncated, tol)
    if rank > m_trunc:
        raise CheckFailure("rank witness exceeded the mixture size")
    meta = reporting.metadata("classical-dephase", args.seed, tol, args.deterministic)
    meta.update({"d": d, "m": d, "witness_mixture_size": m_trunc, "witness_rank": rank})
    reporting.write_csv(_outpath(args, "classical_dephase.csv"), meta,
                        "d,trial,residual", rows)


def cmd_transition(args, tol: Tolerances) -> None:
    from .sampling import random_majorizing_pair
    modes = ["quantum", "classical"] if args.mode == "both" else [args.mode]
    rows = []
    for trial, rng in enumerate(spawn_rngs(args.seed, args.trials)):
        rho, rho_prime = random_majorizing_pair(args.d, rng)
        for mode in modes:
            plan = dephaser.transition_channel(rho, rho_prime, mode, tol)
            err = trace_norm(plan.apply(rho) - rho_prime)
            rows.append(f"{args.d},{trial},{mode},{plan.noise_dim},{err:.16e}")
            if err > tol.transition_residual:
                raise CheckFailure(f"transition error {err} at trial {trial} ({mode})")
    meta = reporting.metadata("transition", args.seed, tol, args.deterministic)
    meta["d"], meta["trials"] = args.d, args.trials
    reporting.write_csv(_outpath(args, "transition.csv"), meta,
                        "d,trial,mode,m,error", rows)


def cmd_chain(args, tol: Tolerances) -> None:
    rngs = spawn_rngs(args.seed, args.n)
    from .sampling import random_pure_state
    states = [random_pure_state(args.d, rng) for rng in rngs]
    _, report = dephaser.catalytic_chain(states, tol=tol)
    if max(report.marginal_residuals) > tol.chain_residual:
        raise CheckFailure("a chain marginal deviates from its pinch")
    if report.catalyst_residual > tol.chain_residual:
        raise CheckFailure("catalyst marginal deviates from maximally mixed")
    meta = reporting.metadata("chain", args.seed, tol, args.deterministic)
    payload = {
        "n": args.n,
        "d": args.d,
        "marginal_residuals": list(report.marginal_residuals),
        "catalyst_residual": report.catalyst_residual,
        "mutual_information_bits": report.mutual_information.tolist(),
    }
    reporting.write_json(_outpath(args, "chain.json"), meta, payload)


def cmd_machine(args, tol: Tolerances) -> None:
    rng_rho, rng_sigma = spawn_rngs(args.seed, 2)
    d = args.d
    m = dephaser.ancilla_dim(d)
    rho = random_density_matrix(d, rng_rho)
    sigma = random_density_matrix(m, rng_sigma)
    report = dephaser.machine_iterate(rho, [sigma] * args.iters, tol)
    for row in report.rows:
        if row.dist_system > row.bound_system + tol.bound_slack:
            raise CheckFailure(f"system bound violated at n={row.n}")
        if d == m * m and row.dist_ancilla > row.bound_ancilla + tol.bound_slack:
            raise CheckFailure(f"ancilla bound violated at n={row.n}")
    meta = reporting.metadata("machine", args.seed, tol, args.deterministic)
    meta["d"], meta["m"], meta["iters"] = d, m, args.iters
    reporting.write_csv(_outpath(args, "machine.csv"), meta,
                        dephaser.MachineReport.CSV_HEADER, report.csv_rows())


def cmd_recur(args, tol: Tolerances) -> None:
    spec = recurrence.RecurrenceSpec.for_ancilla(args.m)
    kmax = args.kmax if args.kmax is not None else 2 * spec.m
    rng = spawn_rngs(args.seed, 1)[0]
    rho = random_density_matrix(spec.d, rng)
    rows = []
    for k in range(1, kmax + 1):
        got = recurrence.stroboscopic_map(spec, rho, k)
        ideal = recurrence.predicted_map(k, spec.m, rho)
        exact = recurrence.construction_predicted_map(spec, rho, k)
        r_ideal = trace_norm(got - ideal)
        r_exact = trace_norm(got - exact)
        rows.append(f"{spec.m},{k},{r_ideal:.16e},{r_exact:.16e}")
        if r_exact > tol.recurrence_residual:
            raise CheckFailure(f"construction prediction violated at k={k}")
    meta = reporting.metadata("recur", args.seed, tol, args.deterministic)
    meta["m"], meta["factors"] = spec.m, list(spec.factors)
    reporting.write_csv(_outpath(args, "recur.csv"), meta,
                        "m,k,residual_vs_ideal,residual_vs_construction", rows)


def cmd_fig3(args, tol: Tolerances) -> None:
    sweeps = recurrence.fig3_sweep(args.m, args.samples, tol)
    prefix = args.out if args.out else "fig3"
    meta_base = reporting.metadata("fig3", args.seed, tol, args.deterministic)
    for m, sweep in sweeps.items():
        for k in range(1, m):
            if sweep.distance_at(float(k)) > tol.integer_time_residual:
                raise CheckFailure(f"integer-time distance too large at m={m}, t={k}")
        meta = dict(meta_base)
        meta["m"], meta["samples"] = m, args.samples
        reporting.write_csv(Path(f"{prefix}_m{m}.csv"), meta,
                            recurrence.TimeSweep.CSV_HEADER, sweep.csv_rows())


def cmd_pqc(args, tol: Tolerances) -> None:
    rng = spawn_rngs(args.seed, 1)[0]
    rho = random_density_matrix(4, rng)
    err = None
    if args.error is not None:
        bits = [int(b) for b in args.error]
        if len(bits) != 4 or any(b not in (0, 1) for b in bits):
            raise CheckFailure("error must be four bits, e.g. 0100")
        err = pqc.PauliError(*bits)
    transcript = pqc.run_transcript(rho, err, auth_rounds=args.rounds,
                                    seed=args.seed, tol=tol)
    if transcript["ciphertext_marginal_distance"] > tol.pqc_security:
        raise CheckFailure("ciphertext is distinguishable from maximally mixed")
    if transcript["recovered_fidelity"] < 1.0 - tol.pqc_security:
        raise CheckFailure("message was not recovered")
    meta = reporting.metadata("pqc", args.seed, tol, args.deterministic)
    reporting.write_json(_outpath(args, "pqc.json"), meta, transcript)


def cmd_expander(args, tol: Tolerances) -> None:
    spec = expander.ExpanderSpec(e=args.e, k=args.k)
    rho = bounds_mod.maximally_coherent_state(spec.d)
    report = expander.theorem3_verify(spec, rho)
    if not report.satisfied():
        raise CheckFailure("measured distance exceeded the analytic envelope")
    meta = reporting.metadata("expander", args.seed, tol, args.deterministic)
    meta["e"], meta["d"], meta["fitted_decay"] = spec.e, spec.d, report.fitted_decay
    meta["min_eigenvalue"] = min(report.min_eigenvalue)
    reporting.write_csv(_outpath(args, "expander.csv"), meta,
                        expander.ConvergenceReport.CSV_HEADER, report.csv_rows())


def cmd_bounds(args, tol: Tolerances) -> None:
    d, eps = args.d, args.epsilon
    quantum = dephaser.build_dephasing_unitary(d, tol=tol)
    classical = dephaser.classical_dephasing_channel(d)
    probes = bounds_mod.default_probes(d, seed=args.seed)
    rep_q = bounds_mod.measure_epsilon(quantum, probes=probes, tol=tol)
    rep_c = bounds_mod.measure_epsilon(classical, probes=probes, tol=tol)
    if max(rep_q.epsilon_measured, rep_c.epsilon_measured) > tol.dephasing_residual:
        raise CheckFailure("a constructed channel is not exactly dephasing")
    bound_q = bounds_mod.quantum_lower_bound(d, eps)
    bound_c = bounds_mod.classical_lower_bound(d, eps)
    budget = bounds_mod.entropy_budget_check(quantum, tol)
    if not budget.triangle_satisfied(tol.bound_slack):
        raise CheckFailure("entropy budget triangle inequality violated")
    meta = reporting.metadata("bounds", args.seed, tol, args.deterministic)
    payload = {
        "epsilon": eps,
        "quantum": rep_q.to_json_dict(bound_q),
        "classical": rep_c.to_json_dict(bound_c),
        "entropy_budget": {
            "joint": budget.joint_entropy,
            "output": budget.output_entropy,
            "ancilla": budget.ancilla_entropy,
            "saturated": budget.saturated(tol.bound_slack),
        },
    }
    reporting.write_json(_outpath(args, "bounds.json"), meta, payload)


_COMMANDS = {
    "dephase": cmd_dephase,
    "classical-dephase": cmd_classical_dephase,
    "transition": cmd_transition,
    "chain": cmd_chain,
    "machine": cmd_machine,
    "recur": cmd_recur,
    "fig3": cmd_fig3,
    "pqc": cmd_pqc,
    "expander": cmd_expander,
    "bounds": cmd_bounds,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = _apply_config(parser, sys.argv[1:] if argv is None else list(argv))
    try:
        tol = _tol(args)
    except (OSError, ValueError) as exc:
        parser.error(f"bad tolerance file: {exc}")
    try:
        _COMMANDS[args.command](args, tol)
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
