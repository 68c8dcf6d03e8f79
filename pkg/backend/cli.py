#!/usr/bin/env python3
"""
Command line for the bipartite Ramsey coloring toolkit

    python cli.py construct near_rainbow_pairs --n 8 --out pairs.json
    python cli.py verify --coloring pairs.json --s 2 --t 2 --q 3
    python cli.py exact --n 3 --s 2 --t 2 --q 3 --store
    python cli.py report --format csv
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional

from app.bounds import (
    check_corradi_instance,
    exact_formulas,
    lemma_a1_check,
    random_family,
    threshold_classify,
)
from app.constructions import CONSTRUCTIONS, construct
from app.core import Coloring, ColoringDocument, make_spec
from app.energy.graph import (
    EnergyConfig,
    build_energy,
    color_energy,
    energy_lower_bound_colors,
    pruned_energy,
    validate_pruned,
)
from app.errors import InputError, RamseyToolError, UsageError
from app.exact import SearchBudget, exact_r
from app.store import ResultKey, ResultRecord, ResultStore, render_report, report, resolve_store_path
from app.verifier import VALID, VIOLATION, verify
from config import DEFAULT_SEED, JOBS, LOG_FILE, LOG_LEVEL, NODE_LIMIT, TIME_LIMIT, TOOL_VERSION

logger = logging.getLogger(__name__)

VERIFY_EXIT = {VALID: 0, VIOLATION: 1}


class ToolArgumentParser(argparse.ArgumentParser):
    """argparse reports problems through UsageError instead of exiting"""

    def error(self, message: str) -> None:
        raise UsageError(message)


def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if LOG_FILE:
        handler = logging.FileHandler(LOG_FILE, encoding="utf-8")
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        logging.getLogger().addHandler(handler)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _emit(payload: Any, out: Optional[str]) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")
        logger.info(f"📄 wrote {out}")
    else:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))


def _load_coloring(path: str) -> Coloring:
    """Accepts a bare coloring document or a construction document wrapping one"""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise InputError(f"coloring file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not JSON: {e}") from e
    if isinstance(raw, dict) and "coloring" in raw:
        raw = raw["coloring"]
    return Coloring.from_json(json.dumps(raw))


def _store(args: argparse.Namespace) -> Optional[ResultStore]:
    if args.store is None:
        return None
    return ResultStore(resolve_store_path(args.store or None))


def _record(args: argparse.Namespace, kind: str, key: ResultKey, payload: dict) -> None:
    store = _store(args)
    if store is not None:
        store.append(ResultRecord(key=key, kind=kind, payload=payload))


def _add_output(parser: argparse.ArgumentParser, storable: bool = True) -> None:
    parser.add_argument("--out", help="write the JSON report here instead of stdout")
    if storable:
        parser.add_argument("--store", nargs="?", const="", default=None,
                            help="append a record to the results store (default path from RBL_STORE)")


def _add_triple(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--s", type=int, required=required)
    parser.add_argument("--t", type=int, required=required)
    parser.add_argument("--q", type=int, required=required)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_construct(args: argparse.Namespace) -> int:
    params = {"n": args.n}
    for name in ("s", "t", "q", "ell", "density_target", "parts_a", "parts_b"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    if args.name == "hypergraph_coloring":
        params["seed"] = args.seed
        logger.info(f"🎲 hypergraph construction seeded with {args.seed}")
    result = construct(args.name, **params)
    document = result.to_document()
    for flag in result.flags:
        logger.warning(f"⚠️ {args.name}: {flag}")
    _emit(document, args.out)

    claim = result.claimed_spec
    key = ResultKey(n=args.n, s=claim.s if claim else 0, t=claim.t if claim else 0, q=claim.q if claim else 0,
                    mode=args.name, seed=params.get("seed"), tool_version=TOOL_VERSION)
    _record(args, "construct", key, {"claim": document["claim"], "provenance": document["provenance"],
                                     "flags": document["flags"]})
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    coloring = _load_coloring(args.coloring)
    spec = make_spec(args.s, args.t, args.q)
    result = verify(coloring, spec, jobs=args.jobs)
    payload = result.model_dump(mode="json")
    _emit(payload, args.out)
    if result.status == VIOLATION:
        logger.info(f"❌ {spec} violated at {result.witness} ({result.observed} colors)")
    else:
        logger.info(f"✅ {result.status} for {spec} after {result.copies_checked} copies")
    key = ResultKey(n=coloring.n, s=args.s, t=args.t, q=args.q, mode="verify", tool_version=TOOL_VERSION)
    _record(args, "verify", key, payload)
    return VERIFY_EXIT.get(result.status, 2)


def cmd_exact(args: argparse.Namespace) -> int:
    spec = make_spec(args.s, args.t, args.q)
    try:
        budget = SearchBudget(node_limit=args.node_limit, time_limit=args.time_limit, mode=args.mode)
    except ValueError as e:
        raise InputError(str(e)) from e
    result = exact_r(args.n, spec, budget=budget, jobs=args.jobs)
    payload = result.model_dump(mode="json")
    _emit(payload, args.out)
    key = ResultKey(n=args.n, s=args.s, t=args.t, q=args.q, mode=budget.mode, tool_version=TOOL_VERSION)
    _record(args, "exact", key, payload)
    return 0


def cmd_energy(args: argparse.Namespace) -> int:
    coloring = _load_coloring(args.coloring)
    logger.info(f"🎲 energy partition seeded with {args.seed}")
    raw = build_energy(coloring, args.r, jobs=args.jobs)
    if args.stage == "raw":
        graph = raw
    else:
        config = EnergyConfig(seed=args.seed, threshold=args.threshold, ell_star=args.ell_star, jobs=args.jobs)
        graph = pruned_energy(coloring, args.r, config)

    if args.emit == "graph":
        _emit(graph.to_document(), args.out)
        return 0
    validation = validate_pruned(graph) if args.stage == "pruned" else None
    stats = {
        "n": coloring.n,
        "r": args.r,
        "seed": args.seed,
        "color_energy": color_energy(coloring, args.r),
        "raw_edges": raw.edge_count,
        "energy_lower_bound_colors": energy_lower_bound_colors(raw.edge_count, coloring.n, args.r),
        "stage": graph.stage.value,
        "edges": graph.edge_count,
        "colors": len(graph.colors()),
        "flags": list(graph.flags),
        "validation": validation.model_dump(mode="json") if validation else None,
    }
    _emit(stats, args.out)
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    payload = threshold_classify(args.s, args.t, args.q).model_dump(mode="json")
    if args.n is not None:
        payload["formulas"] = exact_formulas(args.n, args.s, args.t, args.q)
    _emit(payload, args.out)
    return 0


def cmd_check_lemmas(args: argparse.Namespace) -> int:
    if args.which == "a1":
        violations = [list(pair) for pair in lemma_a1_check(args.s_max, args.t_max, jobs=args.jobs)]
        checked = {"s_max": args.s_max, "t_max": args.t_max}
    else:
        r = 2 if args.which == "corradi" else 3
        violations = []
        for seed in range(args.seeds):
            result = check_corradi_instance(random_family(seed, r=r))
            if result.satisfied is False or not result.identity_ok:
                violations.append({"seed": seed, **result.model_dump(mode="json")})
        checked = {"seeds": args.seeds, "r": r}
    _emit({"which": args.which, "checked": checked, "violations": violations}, args.out)
    if violations:
        logger.warning(f"⚠️ {len(violations)} violations for {args.which}")
        return 1
    logger.info(f"✅ {args.which}: no violations")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    store = ResultStore(resolve_store_path(args.store or None))
    table = report(store)
    logger.info(f"📊 {len(table)} stored exact values from {store.path}")
    _emit(render_report(table, args.format), args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> ToolArgumentParser:
    parser = ToolArgumentParser(prog="rbl", description="Colorings of K_{n,n} where every K_{s,t} sees q colors")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ToolArgumentParser)

    p = sub.add_parser("construct", help="build an explicit coloring")
    p.add_argument("name", choices=sorted(CONSTRUCTIONS))
    p.add_argument("--n", type=int, required=True)
    _add_triple(p, required=False)
    p.add_argument("--ell", type=int)
    p.add_argument("--density-target", type=int)
    p.add_argument("--parts-a", type=int, nargs="+")
    p.add_argument("--parts-b", type=int, nargs="+")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_output(p)
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser("verify", help="check a coloring against (s, t, q)")
    p.add_argument("--coloring", required=True)
    _add_triple(p)
    p.add_argument("--jobs", type=int, default=JOBS)
    _add_output(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("exact", help="exact r(K_{n,n}, K_{s,t}, q) for small n")
    p.add_argument("--n", type=int, required=True)
    _add_triple(p)
    p.add_argument("--node-limit", type=int, default=NODE_LIMIT)
    p.add_argument("--time-limit", type=float, default=TIME_LIMIT)
    p.add_argument("--mode", choices=["decide", "minimize"], default="minimize")
    p.add_argument("--jobs", type=int, default=JOBS)
    _add_output(p)
    p.set_defaults(handler=cmd_exact)

    p = sub.add_parser("energy", help="color energy graph statistics or edge list")
    p.add_argument("--coloring", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--threshold", type=int)
    p.add_argument("--ell-star", type=int)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--stage", choices=["raw", "pruned"], default="pruned")
    p.add_argument("--emit", choices=["stats", "graph"], default="stats")
    p.add_argument("--jobs", type=int, default=JOBS)
    _add_output(p, storable=False)
    p.set_defaults(handler=cmd_energy)

    p = sub.add_parser("bounds", help="classify (s, t, q) against the known thresholds")
    _add_triple(p)
    p.add_argument("--n", type=int, help="also evaluate closed forms at this n")
    _add_output(p, storable=False)
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("check-lemmas", help="randomized and exhaustive lemma checks")
    p.add_argument("--which", choices=["corradi", "gen-corradi", "a1"], required=True)
    p.add_argument("--seeds", type=int, default=1000)
    p.add_argument("--s-max", type=int, default=50)
    p.add_argument("--t-max", type=int, default=150)
    p.add_argument("--jobs", type=int, default=JOBS)
    _add_output(p, storable=False)
    p.set_defaults(handler=cmd_check_lemmas)

    p = sub.add_parser("report", help="compare stored exact values with closed forms")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--store", nargs="?", const="", default=None)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_report)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, dispatch, and map errors to exit codes"""
    try:
        args = build_parser().parse_args(argv)
        return args.handler(args)
    except RamseyToolError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"❌ internal error: {e}")
        return 70


def main() -> None:
    configure_logging()
    logger.info(f"🚀 rbl {TOOL_VERSION}: {' '.join(sys.argv[1:])}")
    code = run()
    logger.info(f"{'✅' if code == 0 else '⚠️'} finished with exit code {code}")
    sys.exit(code)


if __name__ == "__main__":
    main()
