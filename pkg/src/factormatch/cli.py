"""Command-line interface: ``factormatch {gen,spectrum,bounds,match,verify}``."""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Optional, Sequence

from . import __version__
from .graph import (
    GraphError,
    cayley_graph,
    format_graph,
    load_graph,
    load_group,
    named_graph,
    random_regular_bipartite,
)
from .matching import MatchingError, run
from .report import dumps_json, render
from .spectral import spectral_report
from .suites import SUITES, SuiteConfig, run_suite


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _parse_gens(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"generators must be integers, got {text!r}") from None


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _flat(d: dict) -> str:
    """Render a dict report as ``key: value`` lines for --format text/csv."""
    lines = []
    for k in sorted(d):
        v = d[k]
        text = v if isinstance(v, str) else " ".join(dumps_json(v).split())
        lines.append(f"{k}: {text}")
    return "\n".join(lines) + "\n"


def cmd_gen(args) -> int:
    if args.type == "random-bipartite":
        if args.side is None or args.degree is None:
            raise SystemExit("gen --type random-bipartite needs --side and --degree")
        g, _ = random_regular_bipartite(args.side, args.degree, args.seed)
    elif args.type == "cayley":
        if args.group is None or args.gens is None:
            raise SystemExit("gen --type cayley needs --group and --gens")
        g = cayley_graph(load_group(args.group), args.gens)
    else:
        if args.name is None:
            raise SystemExit("gen --type named needs --name")
        g = named_graph(args.name)
    _write(format_graph(g), args.out)
    return 0


def cmd_spectrum(args) -> int:
    rep = spectral_report(load_graph(args.graph))
    out = {k: rep[k] for k in ("graph_id", "n", "d", "eigenvalues", "rho_plus", "rho_minus", "rho")}
    _write(dumps_json(out) if args.format == "json" else _flat(out), args.out)
    return 0


def cmd_bounds(args) -> int:
    rep = spectral_report(load_graph(args.graph), oracle=args.oracle)
    _write(dumps_json(rep) if args.format == "json" else _flat(rep), args.out)
    return 0 if all(c["pass"] for c in rep["checks"]) else 1


def cmd_match(args) -> int:
    g = load_graph(args.graph)
    m, stats = run(g, args.seed)
    _write("".join(f"{u} {v}\n" for u, v in m.pairs()), args.out)
    stats_text = dumps_json(stats.to_dict())
    if args.stats:
        _write(stats_text, args.stats)
    elif args.out not in (None, "-"):
        sys.stdout.write(stats_text)
    else:
        sys.stderr.write(stats_text)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "steps", "flips", "unmatched_fraction"])
            for s in stats.stages:
                w.writerow([s.n, s.steps, s.flips, f"{s.unmatched_fraction:.12g}"])
    return 0 if m.is_perfect() else 1


def cmd_verify(args) -> int:
    cfg = SuiteConfig(seed=args.seed, nmax=args.nmax)
    if args.seeds is not None:
        cfg.seeds = args.seeds
    report = run_suite(args.suite, cfg)
    fmt = "text-summary" if args.format == "text" else args.format
    _write(render(report, fmt), args.out)
    return report.exit_code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")

    p = argparse.ArgumentParser(prog="factormatch", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="write a graph file")
    gen.add_argument("--type", choices=("random-bipartite", "cayley", "named"), required=True)
    gen.add_argument("--side", type=int)
    gen.add_argument("--degree", type=int)
    gen.add_argument("--group", help="group table file or built-in id such as cyclic:6")
    gen.add_argument("--gens", type=_parse_gens, help="comma-separated element indices")
    gen.add_argument("--name", help="named graph id such as petersen or cycle:6")
    gen.set_defaults(func=cmd_gen)

    spec = sub.add_parser("spectrum", parents=[common], help="transition-operator spectrum")
    spec.add_argument("--graph", required=True)
    spec.set_defaults(func=cmd_spectrum)

    bnd = sub.add_parser("bounds", parents=[common], help="independence and expansion bounds")
    bnd.add_argument("--graph", required=True)
    bnd.add_argument("--oracle", action="store_true", help="also compare with exact solvers")
    bnd.set_defaults(func=cmd_bounds)

    mt = sub.add_parser("match", parents=[common], help="run the chain-flipping algorithm")
    mt.add_argument("--graph", required=True)
    mt.add_argument("--trace", help="per-stage CSV trace path")
    mt.add_argument("--stats", help="RunStats JSON path")
    mt.set_defaults(func=cmd_match)

    ver = sub.add_parser("verify", parents=[common], help="run a verification suite")
    ver.add_argument("--suite", choices=SUITES + ("all",), required=True)
    ver.add_argument("--nmax", type=int)
    ver.add_argument("--seeds", type=int)
    ver.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, MatchingError, ValueError, OSError) as exc:
        sys.stderr.write(f"factormatch: error: {exc}\n")
        return 2
