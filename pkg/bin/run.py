"""
Hypercube routing toolkit.

Usage:
  hcroute lr-route pair.json
  hcroute lr-route2 pair.json --format json
  hcroute analyze-fn 0011 --mode exhaustive
  hcroute check-theorems --d 3 --exhaustive
  hcroute search rout --d 3 --exhaustive --out reports/rout_d3.json --format json
  hcroute search --list
  hcroute emit-report reports/rout_d3.json --format text

`search <name>` dynamically imports domains.<name>.run_<name> and calls its
`main(...)`, passing only the arguments it accepts (signature introspection).

Exit codes: 0 ok, 2 bad input or configuration, 3 a proven statement failed.
"""
from __future__ import annotations
import argparse, importlib, inspect, json, logging, os, pkgutil, sys
from typing import Any, Dict, List, Optional

from kernel import ConfigError, HypercubeError, PreconditionError, SplitFailure, TheoremViolation
from matched_pairs import MatchedPair, require_valid
from lr_routing import check_double_lr_solution, check_lr_solution, double_lr_solution, lr_solution
from monotonicity import BooleanFunction, analyze
from registry import FORMATS, load_report, render_report, write_report
from search import ConjectureReport, run_theorem_sweep

log = logging.getLogger("hcroute")


def discover_domains() -> Dict[str, str]:
    """Return map: domain_name -> module_path for run_<domain>.py files."""
    found = {}
    try:
        pkg = importlib.import_module("domains")
    except ImportError:
        return found
    pkgpath = pkg.__path__  # type: ignore[attr-defined]
    for _, modname, ispkg in pkgutil.iter_modules(pkgpath):
        if not ispkg:
            continue
        run_mod = f"domains.{modname}.run_{modname}"
        try:
            importlib.import_module(run_mod)
            found[modname] = run_mod
        except ImportError as exc:
            log.debug("skipping domain %s: %s", modname, exc)
    return found


def coerce_kwargs_for(func, cand_kwargs: Dict[str, Any]) -> Dict[str, Any]:
    """Filter cand_kwargs to only those accepted by func, with correct names."""
    sig = inspect.signature(func)
    return {k: v for k, v in cand_kwargs.items() if k in sig.parameters}


# ---------------------------
# Input / output
# ---------------------------

def _read_text(arg: str) -> str:
    if os.path.exists(arg):
        try:
            with open(arg, encoding="utf-8") as f:
                return f.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {arg}: {exc}") from exc
    return arg


def load_pair(arg: str) -> MatchedPair:
    """A matched pair from a JSON file or an inline JSON document."""
    try:
        obj = json.loads(_read_text(arg))
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"not a matched pair: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise PreconditionError("not a matched pair: expected a JSON object")
    return require_valid(MatchedPair.from_json(obj))


def emit(args: argparse.Namespace, report: Any) -> None:
    if args.out:
        write_report(report, args.out, args.format)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(render_report(report, args.format))


class _Document:
    """Adapter giving plain results the report interface."""

    def __init__(self, obj: Dict[str, Any], lines: List[str]) -> None:
        self.obj = obj
        self.lines = lines

    def to_json(self) -> Dict[str, Any]:
        return self.obj

    def text_lines(self) -> List[str]:
        return self.lines


def _path_line(path: List[str]) -> str:
    return " -> ".join(path)


# ---------------------------
# Subcommands
# ---------------------------

def cmd_lr_route(args: argparse.Namespace) -> int:
    p = load_pair(args.pair)
    sol = lr_solution(p)
    why = check_lr_solution(p, sol)
    check = "vertex-disjoint: OK" if why is None else f"vertex-disjoint: FAILED ({why})"
    doc = dict(sol.to_json(), check=check)
    emit(args, _Document(doc, [_path_line(x) for x in sol.rendered()] + [check]))
    return 0 if why is None else 3


def cmd_lr_route2(args: argparse.Namespace) -> int:
    p = load_pair(args.pair)
    sol = double_lr_solution(p)
    why = check_double_lr_solution(p, sol)
    check = "vertex-disjoint collections, edge-disjoint union: " + ("OK" if why is None else f"FAILED ({why})")
    lines = ["first:"] + ["  " + _path_line(x) for x in sol.first.rendered()]
    lines += ["second:"] + ["  " + _path_line(x) for x in sol.second.rendered()]
    emit(args, _Document(dict(sol.to_json(), check=check), lines + [check]))
    return 0 if why is None else 3


def cmd_analyze_fn(args: argparse.Namespace) -> int:
    if args.random:
        if args.d is None:
            raise ConfigError("--random needs --d")
        f = BooleanFunction.random(args.d, args.seed)
    elif args.function is None:
        raise ConfigError("give a truth table, a file holding one, or --random")
    elif args.hex:
        if args.d is None:
            raise ConfigError("--hex needs --d")
        f = BooleanFunction.from_hex(_read_text(args.function), args.d)
    else:
        f = BooleanFunction.from_bitstring(_read_text(args.function), args.d)
    emit(args, analyze(f, mode=args.mode, seed=args.seed))
    return 0


def cmd_check_theorems(args: argparse.Namespace) -> int:
    generator = "random" if args.random else "exhaustive"
    report = run_theorem_sweep(args.d, generator, args.budget, args.seed, args.workers)
    emit(args, report)
    return 3 if report.violations else 0


def cmd_search(args: argparse.Namespace) -> int:
    domains = discover_domains()
    if args.list or not args.name:
        print("Available searches:")
        for k, v in sorted(domains.items()):
            print(f"  - {k}  ({v})")
        return 0
    if args.name not in domains:
        raise ConfigError(f"search '{args.name}' not found; use --list to see available searches")

    mod = importlib.import_module(domains[args.name])
    raw_kwargs = {
        "d": args.d,
        "seed": args.seed,
        "budget": args.budget,
        "max_size": args.max_size,
        "exhaustive": not args.random,
        "workers": args.workers,
        "keep_records": args.keep_records,
        "outdir": args.telemetry,
    }
    raw_kwargs = {k: v for k, v in raw_kwargs.items() if v is not None}
    report = mod.main(**coerce_kwargs_for(mod.main, raw_kwargs))
    emit(args, report)
    return 3 if report.theorem_violations else 0


def cmd_emit_report(args: argparse.Namespace) -> int:
    obj = load_report(args.report)
    report: Any = obj
    if isinstance(obj, dict) and obj.get("kind") == "conjecture-report":
        report = ConjectureReport.from_json(obj)
    emit(args, report)
    return 0


# ---------------------------
# Parser
# ---------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text", help="Output format (default text)")
    common.add_argument("--out", help="Write the output to this file instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug (stderr)")

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--d", type=int, default=None, help="Dimension")
    sweep.add_argument("--seed", type=int, default=0, help="Random seed (default 0)")
    sweep.add_argument("--budget", type=int, default=None, help="Instance count (random) or cap (exhaustive)")
    sweep.add_argument("--workers", type=int, default=None, help="Worker processes (default HCF_THREADS or 1)")
    mode = sweep.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="Enumerate every instance (default)")
    mode.add_argument("--random", action="store_true", help="Draw --budget random instances")

    parser = argparse.ArgumentParser(prog="hcroute", description="Directed hypercube routing and isoperimetry toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lr-route", parents=[common], help="Vertex-disjoint paths for a matched pair")
    p.add_argument("pair", help="Matched pair JSON file (or inline JSON)")
    p.set_defaults(func=cmd_lr_route)

    p = sub.add_parser("lr-route2", parents=[common], help="Two collections with edge-disjoint union")
    p.add_argument("pair", help="Matched pair JSON file (or inline JSON)")
    p.set_defaults(func=cmd_lr_route2)

    p = sub.add_parser("analyze-fn", parents=[common], help="Isoperimetric quantities of a Boolean function")
    p.add_argument("function", nargs="?", help="Truth table bitstring of length 2^d, or a file holding it")
    p.add_argument("--d", type=int, default=None, help="Dimension (needed for --hex and --random)")
    p.add_argument("--hex", action="store_true", help="Read the truth table as hex")
    p.add_argument("--random", action="store_true", help="Analyze a random function drawn with --seed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("auto", "exhaustive", "local-search", "local"), default="auto", help="Talagrand minimization")
    p.set_defaults(func=cmd_analyze_fn)

    p = sub.add_parser("check-theorems", parents=[common, sweep], help="Proven flow bounds over subsets")
    p.set_defaults(func=cmd_check_theorems)

    p = sub.add_parser("search", parents=[common, sweep], help="Conjecture search (glr, rout)")
    p.add_argument("name", nargs="?", help="Search to run")
    p.add_argument("--max-size", type=int, default=None, help="|S| cap for level pairs")
    p.add_argument("--keep-records", action="store_true", default=None, help="Include every record in the report")
    p.add_argument("--telemetry", default=None, help="Directory for sweep_telemetry.jsonl")
    p.add_argument("--list", action="store_true", help="List available searches and exit")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("emit-report", parents=[common], help="Re-render a saved JSON report")
    p.add_argument("report", help="Report JSON file")
    p.set_defaults(func=cmd_emit_report)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    if getattr(args, "command", None) == "check-theorems" and args.d is None:
        args.d = 3
    try:
        return int(args.func(args))
    except (TheoremViolation, SplitFailure) as exc:
        print(str(exc), file=sys.stderr)
        return 3
    except HypercubeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
