"""Command-line interface: ``psf <subcommand> ...`` with JSON on stdout.

Exit status is 0 on success (an UNKNOWN verdict included), 2 for usage or
input errors, 1 for engine failures. Budget defaults come from
PSF_BUDGET_BOX, PSF_BUDGET_CAP and PSF_SEED; flags override them.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .certify import bounds_report, find_certificate
from .closure import (
    SearchBudget,
    bounded_closure,
    is_member_bounded,
    search_min_gens,
    verify_generator_set,
)
from .derivation import genset_to_dict, parse_genset, to_sexpr
from .forest import ForestFormatError, parse_forest, shape_stats
from .gensets import gens_generic, gens_isol, gens_kpn, gens_path, gens_tkl
from .semifield import (
    SemifieldSpecError,
    check_ideal_simple_finite,
    check_semiring_axioms,
    make_instance,
)

LONG_RUNNING = {"verify", "closure", "search-min", "semifield-check"}


class UsageError(Exception):
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed {what} JSON: {exc}") from None


def _budget(args) -> SearchBudget:
    box = args.box if args.box is not None else _env_int("PSF_BUDGET_BOX", 12)
    cap = args.cap if args.cap is not None else _env_int("PSF_BUDGET_CAP", 5_000_000)
    seed = args.seed if args.seed is not None else _env_int("PSF_SEED", 0)
    try:
        return SearchBudget(box=box, node_cap=cap, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psf", description="Generators of forest parasemifields.")
    p.add_argument("--version", action="version", version=f"psf {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--box", type=int, help="coordinate bound B for closure search")
    common.add_argument("--cap", type=int, help="node cap for closure search")
    common.add_argument("--seed", type=int, help="seed for sampling")
    common.add_argument("--out", help="also write the JSON result to this file")
    common.add_argument("--results", help="directory receiving one run record per run")
    common.add_argument("--threads", type=int, default=1, help="worker threads for closure search")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser("forest-info", parents=[common], help="shape statistics and bounds of a forest")
    s.add_argument("forest")
    s = sub.add_parser("gens", parents=[common], help="write a generator set with witnesses")
    s.add_argument("--family", required=True, choices=["isol", "path", "tkl", "kpn", "generic"])
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--l", type=int)
    s.add_argument("--forest", help="forest file for --family generic")
    s = sub.add_parser("verify", parents=[common], help="verdict for a generator set")
    s.add_argument("genset")
    s.add_argument("--no-search", action="store_true", help="skip closure search")
    s = sub.add_parser("certify", parents=[common], help="non-generation certificate, if any")
    s.add_argument("genset")
    s = sub.add_parser("bounds", parents=[common], help="bounds on the minimal generator count")
    s.add_argument("forest")
    s = sub.add_parser("closure", parents=[common], help="bounded closure, or bounded membership")
    s.add_argument("genset")
    s.add_argument("--target", help="JSON integer array; test bounded membership")
    s.add_argument("--list", action="store_true", help="include every reached vector")
    s = sub.add_parser("search-min", parents=[common], help="search generating sets of a given size")
    s.add_argument("forest")
    s.add_argument("--size", type=int, required=True)
    s = sub.add_parser("semifield-check", parents=[common], help="axiom and ideal checks")
    s.add_argument("spec")
    s.add_argument("--samples", type=int, default=1000)
    return p


def _forest(path: str):
    try:
        return parse_forest(_read_input(path))
    except ForestFormatError as exc:
        raise UsageError(str(exc)) from None


def _genset(path: str):
    text = _read_input(path)
    try:
        return parse_genset(_load_json(text, "genset"))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad genset: {exc}") from None


def _cmd_gens(args) -> dict:
    fam = args.family

    def need(*names):
        missing = [f"--{n}" for n in names if getattr(args, n) is None]
        if missing:
            raise UsageError(f"--family {fam} needs {' '.join(missing)}")

    try:
        if fam == "isol":
            need("n")
            gs = gens_isol(args.n)
        elif fam == "path":
            need("n")
            gs = gens_path(args.n)
        elif fam == "tkl":
            need("k", "l")
            gs = gens_tkl(args.k, args.l)
        elif fam == "kpn":
            need("k", "n")
            gs = gens_kpn(args.k, args.n)
        else:
            need("forest")
            gs = gens_generic(_forest(args.forest))
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return genset_to_dict(gs)


def _cmd_verify(args, budget) -> dict:
    gs = _genset(args.genset)
    v = verify_generator_set(gs, budget, threads=args.threads, search=not args.no_search)
    out = v.to_dict()
    if v.witnesses is not None and v.stats.get("source") == "search":
        out["witnesses"] = {r: to_sexpr(d) for r, d in sorted(v.witnesses.items())}
    return out


def _cmd_closure(args, budget) -> dict:
    gs = _genset(args.genset)
    if args.target is not None:
        target = _load_json(args.target, "target")
        if not isinstance(target, list) or not all(isinstance(x, int) for x in target):
            raise UsageError("--target must be a JSON integer array")
        if len(target) != gs.forest.n:
            raise UsageError(f"--target needs {gs.forest.n} coordinates")
        m = is_member_bounded(gs, target, budget, threads=args.threads)
        out = {"status": m.status}
        if m.derivation is not None:
            out["derivation"] = to_sexpr(m.derivation)
        out["stats"] = m.stats
        return out
    if gs.max_abs() > budget.box:
        raise UsageError(f"--box {budget.box} is smaller than the generators' largest entry")
    run = bounded_closure(gs, budget, threads=args.threads)
    out = {"status": run.status, "nodes": run.nodes, "rounds": run.rounds}
    if args.list:
        out["vectors"] = sorted(list(v) for v in run.vector_set())
    return out


def _cmd_semifield(args) -> dict:
    spec = _load_json(_read_input(args.spec), "semifield-spec")
    try:
        s = make_instance(spec)
    except (SemifieldSpecError, ForestFormatError) as exc:
        raise UsageError(str(exc)) from None
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    seed = args.seed if args.seed is not None else _env_int("PSF_SEED", 0)
    out = {"kind": s.kind, "axioms": check_semiring_axioms(s, args.samples, seed).as_dict(s)}
    if s.is_finite:
        out["ideal_simple"] = check_ideal_simple_finite(s)
    return out


def _dispatch(args) -> tuple[dict, SearchBudget | None]:
    cmd = args.command
    if cmd in ("forest-info", "bounds"):
        f = _forest(args.forest)
        if cmd == "bounds":
            return bounds_report(f).as_dict(), None
        return {"stats": shape_stats(f).as_dict(), "bounds": bounds_report(f).as_dict()}, None
    if cmd == "gens":
        return _cmd_gens(args), None
    if cmd == "certify":
        cert = find_certificate(_genset(args.genset))
        return {"certificate": None if cert is None else cert.to_dict()}, None
    if cmd == "semifield-check":
        return _cmd_semifield(args), None
    budget = _budget(args)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    if cmd == "verify":
        return _cmd_verify(args, budget), budget
    if cmd == "closure":
        return _cmd_closure(args, budget), budget
    if args.size < 1:
        raise UsageError("--size must be >= 1")
    outcome = search_min_gens(_forest(args.forest), args.size, budget, threads=args.threads)
    return outcome.to_dict(), budget


def _inputs_digest(args) -> str:
    h = hashlib.sha256()
    for name in ("forest", "genset", "spec"):
        val = getattr(args, name, None)
        if val and val != "-" and Path(val).is_file():
            h.update(Path(val).read_bytes())
    return h.hexdigest()


def _write_record(directory: str, argv: Sequence[str], args, budget, output: dict, wall: float) -> Path:
    digest = _inputs_digest(args)
    record = {
        "command": list(argv),
        "inputs_digest": digest,
        "engine_version": __version__,
        "seed": budget.seed if budget else (args.seed if args.seed is not None else _env_int("PSF_SEED", 0)),
        "budget": budget.as_dict() if budget else None,
        "output": output,
        "wall_time": round(wall, 6),
    }
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    run_digest = hashlib.sha256(json.dumps(record, sort_keys=True).encode()).hexdigest()[:12]
    target = d / f"{stamp}-{run_digest}.json"
    with open(target, "x") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    return target


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        output, budget = _dispatch(args)
    except UsageError as exc:
        print(f"psf: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # engine failure
        print(f"psf: engine error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - t0
    text = json.dumps(output)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    results = args.results or os.environ.get("PSF_RESULTS")
    if results and args.command in LONG_RUNNING:
        _write_record(results, argv, args, budget, output, wall)
    return 0


if __name__ == "__main__":
    sys.exit(main())
