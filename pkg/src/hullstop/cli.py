"""Command line front end.

Subcommands: run (one experiment with a chosen stopping rule), compare
(all three stopping rules on the identical trace), hull (the exact hull
agreement protocol on per-node point clouds), lse (distributed least
squares with the per-iteration error bound), funccalc (distributed
function evaluation with a Holder error certificate).

Exit codes: 0 success, 1 configuration error, 2 no halt within k_max,
3 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .applications import (funccalc_error, funccalc_init, lse_batch,
                           lse_error_bound, lse_gram, lse_payload_states,
                           polynomial_basis, registered_function,
                           unflatten_payload)
from .consensus import consensus_limit, run_consensus, write_state_csv, ConsensusTrace
from .errors import InvariantViolation
from .geometry import vector_norm
from .graph import generate_digraph, graph_to_json, make_weights
from .harness import ExperimentConfig, compare_criteria, run_experiment
from .hull import encode_extreme_set, run_hull_consensus
from .termination import run_radius_stopping
from .geometry import extreme_points, PointSet


class _CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; remap to the config-error code
    def error(self, message):
        raise _CliError(message)


def _add_common(sp):
    sp.add_argument("--nodes", type=int, default=10)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--rho", type=float, default=None)
    sp.add_argument("--rho-relative", action="store_true",
                    help="treat rho as a fraction of the consensus vector norm")
    sp.add_argument("--norm", choices=["1", "2", "inf"], default="2")
    sp.add_argument("--topology", choices=["erdos_renyi", "ring", "complete"],
                    default="erdos_renyi")
    sp.add_argument("--edge-prob", type=float, default=0.3)
    sp.add_argument("--d-bound", type=int, default=None)
    sp.add_argument("--k-max", type=int, default=100_000)
    sp.add_argument("--out-dir", default="out")
    sp.add_argument("--stopping", choices=["radius", "box", "hull", "none"],
                    default="radius")


def build_parser() -> _Parser:
    top = _Parser(prog="hullstop", description=__doc__,
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", parents=[], help="one experiment")
    _add_common(run_p)
    run_p.set_defaults(rho=0.01)
    run_p.add_argument("--engine", choices=["ratio", "row"], default="ratio")

    cmp_p = sub.add_parser("compare", help="radius vs box vs hull stopping")
    _add_common(cmp_p)
    cmp_p.add_argument("--engine", choices=["ratio", "row"], default="ratio")

    hull_p = sub.add_parser("hull", help="exact hull agreement protocol")
    _add_common(hull_p)
    hull_p.add_argument("--points", type=int, default=4,
                        help="points per node in the initial clouds")

    lse_p = sub.add_parser("lse", help="distributed least squares")
    _add_common(lse_p)
    lse_p.set_defaults(k_max=300)
    lse_p.add_argument("--degree", type=int, default=2,
                       help="polynomial basis degree")
    lse_p.add_argument("--data", default=None,
                       help="csv of x,y rows; node count follows the file")

    fc_p = sub.add_parser("funccalc", help="distributed function evaluation")
    _add_common(fc_p)
    fc_p.set_defaults(rho=0.001)
    fc_p.add_argument("--function", choices=["max", "mean", "sum"], default="max")
    return top


def _norm_value(args) -> float:
    return float("inf") if args.norm == "inf" else float(args.norm)


def _config_from(args, stopping=None) -> ExperimentConfig:
    return ExperimentConfig(
        n=args.nodes, dim=args.dim, topology=args.topology,
        edge_prob=args.edge_prob, seed=args.seed,
        engine=getattr(args, "engine", "ratio"),
        stopping=stopping if stopping is not None else args.stopping,
        rho=args.rho, rho_relative=args.rho_relative, norm=_norm_value(args),
        dbound=args.d_bound, k_max=args.k_max, out_dir=args.out_dir,
    ).validate()


def _cmd_run(args) -> int:
    cfg = _config_from(args)
    res = run_experiment(cfg)
    print(json.dumps(res.summary))
    if cfg.stopping != "none" and not res.summary["halted"]:
        return 2
    return 0


def _cmd_compare(args) -> int:
    if args.rho is None:
        raise _CliError("compare requires --rho")
    cfg = _config_from(args, stopping="radius")
    rows = compare_criteria(cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "compare.json"), "w") as fh:
        fh.write(json.dumps(rows, indent=2) + "\n")
    print(f"{'method':<8}{'halt_k':>8}{'extra_bits':>12}{'spread_at_halt':>18}")
    for row in rows:
        spread = "-" if row["spread_at_halt"] is None else f"{row['spread_at_halt']:.3e}"
        halt = "-" if row["halt_k"] is None else str(row["halt_k"])
        print(f"{row['method']:<8}{halt:>8}{row['extra_bits']:>12}{spread:>18}")
    if not all(row["halted"] for row in rows):
        return 2
    return 0


def _cmd_hull(args) -> int:
    if args.points < 1:
        raise _CliError(f"--points must be >= 1, got {args.points}")
    g = generate_digraph(args.nodes, args.topology, args.seed, args.edge_prob)
    rng = np.random.default_rng([args.seed, 2])
    sets = [rng.random((args.points, args.dim)) for _ in range(g.n)]
    final, history = run_hull_consensus(sets, g, rounds=g.diameter, return_history=True)
    central = extreme_points(np.vstack(sets))
    if any(e != central for e in final):
        raise InvariantViolation("hull protocol did not reach the centralized extreme set")
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "graph.json"), "w") as fh:
        fh.write(graph_to_json(g) + "\n")
    with open(os.path.join(args.out_dir, "hull_rounds.csv"), "w") as fh:
        fh.write("round,node,message\n")
        for t, snapshot in enumerate(history):
            for i, ext in enumerate(snapshot):
                msg = ";".join(f"{v:.17g}" for v in encode_extreme_set(ext))
                fh.write(f"{t},{i},{msg}\n")
    summary = {
        "rounds": g.diameter,
        "extreme_count": len(central),
        "agreement": True,
        "hull_points": [list(map(float, q)) for q in central.points],
    }
    with open(os.path.join(args.out_dir, "summary.json"), "w") as fh:
        fh.write(json.dumps(summary, indent=2) + "\n")
    print(json.dumps({k: summary[k] for k in ("rounds", "extreme_count", "agreement")}))
    return 0


def _load_dataset(path):
    xs, ys = [], []
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first and first.lower() not in ("x,y",):
            a, b = first.split(",")
            xs.append(float(a))
            ys.append(float(b))
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split(",")
            xs.append(float(a))
            ys.append(float(b))
    return np.asarray(xs), np.asarray(ys)


def _cmd_lse(args) -> int:
    if args.degree < 0:
        raise _CliError(f"--degree must be >= 0, got {args.degree}")
    basis = polynomial_basis(args.degree)
    M = len(basis)
    if args.data is not None:
        xs, ys = _load_dataset(args.data)
        n = xs.size
    else:
        n = args.nodes
        rng = np.random.default_rng([args.seed, 3])
        xs = rng.uniform(-1.0, 1.0, n)
        theta_true = rng.normal(size=M)
        design = np.stack([_poly_row(x, basis) for x in xs])
        ys = design @ theta_true + 0.01 * rng.normal(size=n)
    if n < 1:
        raise _CliError("dataset is empty")
    g = generate_digraph(n, args.topology, args.seed, args.edge_prob)
    W = make_weights(g, "column")
    theta_hat = lse_batch(xs, ys, basis)
    G_true, z_true = lse_gram(xs, ys, basis)
    state0 = lse_payload_states(xs, ys, basis)
    steps = args.k_max
    trace = run_consensus(W, state0.x, steps)

    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "graph.json"), "w") as fh:
        fh.write(graph_to_json(g) + "\n")
    with open(os.path.join(args.out_dir, "dataset.csv"), "w") as fh:
        fh.write("x,y\n")
        for x, y in zip(xs, ys):
            fh.write(f"{x:.17g},{y:.17g}\n")
    final_err = 0.0
    with open(os.path.join(args.out_dir, "bound.csv"), "w") as fh:
        fh.write("n,node,lhs,bound,holds\n")
        for k in range(trace.states.shape[0]):
            for i in range(g.n):
                Mi, zi = unflatten_payload(trace.states[k, i], M)
                try:
                    eb = lse_error_bound(Mi, zi, G_true, z_true)
                except np.linalg.LinAlgError:
                    fh.write(f"{k},{i},nan,nan,na\n")
                    continue
                if not eb.applicable:
                    fh.write(f"{k},{i},nan,inf,na\n")
                    continue
                theta_i = np.linalg.solve(Mi, zi)
                lhs = float(vector_norm(theta_i - theta_hat, 2.0))
                fh.write(f"{k},{i},{lhs:.17g},{eb.bound:.17g},{int(eb.holds)}\n")
                if k == trace.states.shape[0] - 1:
                    final_err = max(final_err, lhs)
    summary = {
        "theta_hat": [float(v) for v in theta_hat],
        "n": int(n),
        "k_steps": steps,
        "final_max_error": final_err,
        "basis_size": M,
    }
    with open(os.path.join(args.out_dir, "summary.json"), "w") as fh:
        fh.write(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    return 0


def _poly_row(x, basis):
    return np.array([gfun(x) for gfun in basis], dtype=float)


def _cmd_funccalc(args) -> int:
    if args.rho is None or args.rho <= 0:
        raise _CliError(f"funccalc needs --rho > 0, got {args.rho}")
    n = args.nodes
    f, C, alpha = registered_function(args.function, n)
    rng = np.random.default_rng([args.seed, 4])
    u = rng.random(n)
    state0 = funccalc_init(u)
    g = generate_digraph(n, args.topology, args.seed, args.edge_prob)
    W = make_weights(g, "column")
    rho = args.rho
    if args.rho_relative:
        rho = args.rho * float(vector_norm(u, _norm_value(args)))
    trace = run_radius_stopping(g, W, state0.x, rho, Dbound=args.d_bound,
                                p=_norm_value(args), k_max=args.k_max)
    r_bar = consensus_limit(state0.x, W)

    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "graph.json"), "w") as fh:
        fh.write(graph_to_json(g) + "\n")
    write_state_csv(ConsensusTrace("ratio", trace.rs, trace.xs, trace.ys),
                    os.path.join(args.out_dir, "states.csv"))
    holder_ok = True
    with open(os.path.join(args.out_dir, "holder.csv"), "w") as fh:
        fh.write("k,node,lhs,rhs,holds\n")
        for k in range(trace.rs.shape[0]):
            for i in range(n):
                lhs, rhs, ok = funccalc_error(f, C, alpha, trace.rs[k, i], r_bar)
                holder_ok = holder_ok and ok
                fh.write(f"{k},{i},{lhs:.17g},{rhs:.17g},{int(ok)}\n")
    worst = max(abs(float(f(trace.rs[-1, i])) - float(f(r_bar))) for i in range(n))
    cert = C * (2.0 * rho) ** alpha
    summary = {
        "function": args.function,
        "halted": trace.halted,
        "halt_k": trace.halt_t,
        "rho": rho,
        "worst_error_at_end": worst,
        "certificate": cert,
        "certificate_ok": bool(worst <= cert + 1e-12) if trace.halted else None,
        "holder_ok_every_step": holder_ok,
        "f_limit": float(f(r_bar)),
    }
    with open(os.path.join(args.out_dir, "summary.json"), "w") as fh:
        fh.write(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    if not trace.halted:
        return 2
    return 0


_HANDLERS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "hull": _cmd_hull,
    "lse": _cmd_lse,
    "funccalc": _cmd_funccalc,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        return _HANDLERS[args.command](args)
    except _CliError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
