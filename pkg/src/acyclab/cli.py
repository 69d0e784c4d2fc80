"""Command-line front end: samplers, exploration, exact distance, reduction and experiments."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import RandomStream, derive_params, read_graph, write_graph, write_labels
from .distance import min_feedback_edges, min_feedback_edges_bruteforce, min_feedback_edges_dp
from .exploration import STRATEGIES, LABEL_MODES, cycle_detected, epochs, run_strategy, surprises
from .harness import KINDS, ExperimentConfig, run_experiment
from .instances import DagOracle, PermOracle, hidden_labels, materialize
from .reduction import Layout, Shape, SourceGraph, Simulator, gap_params, parse_gadget, reduce


def _sample(args, oracle_cls) -> int:
    n = args.n
    pad = 0
    if n % 3:
        if not args.pad:
            print(f"error: n = {n} is not a multiple of 3 (use --pad to add isolated vertices)", file=sys.stderr)
            return 2
        pad = n % 3
        n -= pad
    params = derive_params(n, args.d)
    oracle = oracle_cls(params, RandomStream(args.seed))
    info = {"distribution": "perm" if oracle_cls is PermOracle else "dag", "seed": args.seed,
            "padding": pad, **params.as_dict()}
    if args.materialize:
        if n + pad > args.limit:
            print(f"error: n = {n + pad} exceeds --limit {args.limit}", file=sys.stderr)
            return 2
        g = materialize(oracle, limit=args.limit)
        if pad:
            g = type(g)(g.n + pad, g.adj + [[] for _ in range(pad)])
        write_graph(g, args.materialize)
        labels_path = args.labels or str(Path(args.materialize).with_suffix(".labels"))
        write_labels(hidden_labels(oracle), labels_path, {n + k: "I" for k in range(pad)})
        info.update(m=g.m, graph=args.materialize, labels=labels_path, acyclic=g.is_acyclic())
    print(json.dumps(info))
    return 0


def cmd_explore(args) -> int:
    params = derive_params(args.n, args.d)
    cls = PermOracle if args.dist == "perm" else DagOracle
    stream = RandomStream(args.seed)
    t = run_strategy(cls(params, stream.child(0)), args.strategy, args.queries, stream.child(1), args.label_mode)
    t.meta["distribution"] = args.dist
    if args.out:
        t.save(args.out)
    stats = epochs(t, params.T, params.N)
    cyc = cycle_detected(t)
    print(json.dumps({"queries": len(t), "truncated": t.truncated, "surprises": surprises(t),
                      "epochs": stats.E, "max_blue_path": max(stats.max_blue_path, default=0),
                      "cycle": cyc}))
    return 0


def cmd_fas(args) -> int:
    g = read_graph(args.graph)
    solver = {"auto": min_feedback_edges, "dp": min_feedback_edges_dp, "bruteforce": min_feedback_edges_bruteforce}
    res = solver[args.method](g)
    print(f"size {res.size}")
    print(f"method {res.method}")
    for u, v in res.witness:
        print(f"{u} {v}")
    return 0


def _shape(args):
    if args.r is None:
        return gap_params(args.Delta, args.delta, args.t)
    try:
        return gap_params(args.Delta, args.delta, args.t, args.r)
    except ValueError as err:
        print(f"warning: {err}; building without the gap guarantee", file=sys.stderr)
        return Shape(args.t, args.r)


def cmd_reduce(args) -> int:
    H = SourceGraph.read(args.input, args.Delta)
    p = _shape(args)
    g, lay = reduce(H, p)
    write_graph(g, args.out)
    if args.labels:
        Path(args.labels).write_text("".join(f"{k} {lay.label(k)}\n" for k in range(g.n)))
    meta = {"n_H": H.n, "m_H": H.m, "vertices": g.n, "arcs": g.m, "max_outdegree": g.max_outdegree(), "t": p.t, "r": p.r}
    if hasattr(p, "as_dict"):
        meta.update(p.as_dict())
    print(json.dumps(meta))
    return 0


def cmd_simulate(args) -> int:
    H = SourceGraph.read(args.input, args.Delta)
    p = _shape(args)
    lay = Layout(H, p.t, p.r)
    sim = Simulator(H.f, H.n, H.Delta, p.t, p.r)
    lines = [ln.strip() for ln in Path(args.queries).read_text().splitlines() if ln.strip()]
    for ln in lines:
        gid = lay.label(int(ln)) if ln.isdigit() else parse_gadget(ln)
        ans, used = sim.query(gid)
        print(f"{gid} | h_queries={used} | " + ", ".join(str(a) for a in ans))
    print(f"total_h_queries {sim.oracle.count} for {len(lines)} queries")
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config, kind=args.kind, output=args.csv, trials=args.trials,
                                seed=args.seed, workers=args.workers)
    res = run_experiment(cfg)
    if not args.csv:
        res.write_csv(sys.stdout)
    extra = {k: v for k, v in res.notes.items() if k != "config"}
    if extra:
        print(json.dumps(extra, default=str), file=sys.stderr)
    for f in res.failures:
        print(f"FAIL {f}", file=sys.stderr)
    return 1 if res.failures else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="acyclab", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    for name, cls in (("sample-perm", PermOracle), ("sample-dag", DagOracle)):
        sp = sub.add_parser(name, help=f"sample a {name[7:]} instance")
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--d", type=int, default=8)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--materialize", metavar="OUT_GRAPH")
        sp.add_argument("--labels", metavar="OUT_LABELS")
        sp.add_argument("--limit", type=int, default=100_000)
        sp.add_argument("--pad", action="store_true", help="add isolated vertices when n is not a multiple of 3")
        sp.set_defaults(func=lambda a, c=cls: _sample(a, c))

    sp = sub.add_parser("explore", help="run an exploration strategy against a lazy oracle")
    sp.add_argument("--dist", choices=("perm", "dag"), default="perm")
    sp.add_argument("--strategy", choices=STRATEGIES, default="bfs_frontier")
    sp.add_argument("--label-mode", choices=LABEL_MODES, default="epoch")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--queries", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_explore)

    sp = sub.add_parser("fas", help="exact minimum feedback arc set of a graph file")
    sp.add_argument("graph")
    sp.add_argument("--method", choices=("auto", "dp", "bruteforce"), default="auto")
    sp.set_defaults(func=cmd_fas)

    for name, func in (("reduce", cmd_reduce), ("simulate", cmd_simulate)):
        sp = sub.add_parser(name, help="build the coloring reduction" if name == "reduce" else "replay gadget queries through f_H")
        sp.add_argument("--input", required=True, help="source graph: 'n m' header then 'u v' edges")
        sp.add_argument("--t", type=int, default=1)
        sp.add_argument("--r", type=int)
        sp.add_argument("--delta", default="0.1")
        sp.add_argument("--Delta", type=int, default=3)
        if name == "reduce":
            sp.add_argument("--out", required=True)
            sp.add_argument("--labels")
        else:
            sp.add_argument("--queries", required=True, help="one gadget label or dense index per line")
        sp.set_defaults(func=func)

    sp = sub.add_parser("experiment", help="run a Monte Carlo experiment and write CSV")
    sp.add_argument("--kind", choices=KINDS)
    sp.add_argument("--config", required=True)
    sp.add_argument("--csv")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_experiment)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
