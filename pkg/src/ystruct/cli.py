"""Command-line entry point: ``ystruct <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data or format error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bayesnet import DataFormatError, forward_sample, load_graph, read_csv, save_net, write_csv
from .discovery import CAVEAT, blcd_search, exhaustive_search, y_posterior
from .equivalence import enumerate_dags
from .experiment import ExperimentConfig, report_json, report_table, run_convergence_experiment
from .fixtures import FIXTURES, SetupError, generate
from .graph import GraphError, d_separated
from .scoring import ScoreParams, bde_log_score

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _names(n: int) -> list[str]:
    return [chr(ord("A") + i) for i in range(n)]


def cmd_enumerate(args, out) -> int:
    if not 1 <= args.nodes <= 5:
        raise UsageError("--nodes must be between 1 and 5")
    dags = list(enumerate_dags(_names(args.nodes)))
    print(len(dags), file=out)
    if args.list:
        for i, g in enumerate(dags):
            print(f"{i}\t{g}", file=out)
    return EXIT_OK


def cmd_dsep(args, out) -> int:
    dag, _, _ = load_graph(args.graph)
    cond = [c for c in args.cond.split(",") if c] if args.cond else []
    try:
        sep = d_separated(dag, args.a, args.b, cond)
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    print("d-separated" if sep else "d-connected", file=out)
    return EXIT_OK


def cmd_score(args, out) -> int:
    dag, arities, _ = load_graph(args.graph)
    data = read_csv(args.data, arities)
    for v in dag.nodes:
        if v in data.variables and data.arity(v) != arities[v]:
            raise DataFormatError(f"arity mismatch for {v}: graph {arities[v]}, data {data.arity(v)}")
    print(f"{bde_log_score(dag, data, ScoreParams(args.ess)):.10f}", file=out)
    return EXIT_OK


def cmd_discover(args, out) -> int:
    if not 0.0 <= args.threshold <= 1.0:
        raise UsageError("--threshold must lie in [0, 1]")
    data = read_csv(args.data)
    params = ScoreParams(args.ess)
    mode = "blcd" if args.blcd else "exhaustive" if args.exhaustive else None
    if mode is None:
        mode = "tetrad" if len(data.variables) == 4 else "blcd"
    if len(data.variables) < 4:
        raise DataFormatError(f"discovery needs at least 4 variables, dataset has {len(data.variables)}")
    doc = {"mode": mode, "m": data.m, "ess": args.ess, "threshold": args.threshold, "note": CAVEAT}
    if mode == "tetrad":
        rep = y_posterior(data, params)
        doc["report"] = rep.to_json(args.posteriors)
        rows = sorted(rep.y_arcs, key=lambda r: (-r[2], r[0], r[1]))
    else:
        search = blcd_search if mode == "blcd" else exhaustive_search
        res = search(data, params, args.threshold)
        doc["report"] = res.to_json(args.posteriors)
        rows = res.arcs
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True), file=out)
    else:
        print(f"{'x':>8}  {'z':>8}  posterior", file=out)
        for x, z, p in rows:
            print(f"{x:>8}  {z:>8}  {p:.6g}", file=out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
        if args.seed is not None:
            doc["master_seed"] = args.seed
        cfg = ExperimentConfig.from_dict(doc)
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{args.config}: {exc}") from None
    report = run_convergence_experiment(cfg)
    if args.out:
        Path(args.out).write_text(report_json(report))
    print(report_table(report), end="", file=out)
    return EXIT_OK


def cmd_gen(args, out) -> int:
    if args.fixture not in FIXTURES:
        raise UsageError(f"unknown fixture {args.fixture!r}; choose from {', '.join(sorted(FIXTURES))}")
    if args.m < 0:
        raise UsageError("--m must be nonnegative")
    net = generate(args.fixture, args.seed, args.arity, tol=args.faithfulness_tol)
    data = forward_sample(net, args.m, args.seed)
    write_csv(data, args.out)
    if args.net_out:
        save_net(net, args.net_out)
    print(f"wrote {data.m} rows over {','.join(data.variables)} to {args.out}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ystruct", description="Score-based local causal discovery with Y structures.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("enumerate", help="count (and list) labeled DAGs")
    s.add_argument("--nodes", type=int, required=True)
    s.add_argument("--list", action="store_true")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("dsep", help="d-separation query on a graph file")
    s.add_argument("--graph", required=True)
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--cond", default="")
    s.set_defaults(func=cmd_dsep)

    s = sub.add_parser("score", help="BDe log score of a graph on a dataset")
    s.add_argument("--graph", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--ess", type=float, default=1.0)
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("discover", help="Y-structure discovery on a dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--ess", type=float, default=1.0)
    s.add_argument("--threshold", type=float, default=0.5)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--blcd", action="store_true")
    s.add_argument("--json", action="store_true", help="print the JSON report instead of a table")
    s.add_argument("--posteriors", action="store_true", help="include all 543 posteriors in JSON")
    s.add_argument("--out")
    s.set_defaults(func=cmd_discover)

    s = sub.add_parser("simulate", help="run a convergence experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="write the JSON report here")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("gen", help="sample a dataset from a named fixture")
    s.add_argument("--fixture", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--arity", type=int, default=2)
    s.add_argument("--faithfulness-tol", type=float, default=0.01)
    s.add_argument("--net-out")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("ystruct: a command is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except (DataFormatError, GraphError, SetupError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
