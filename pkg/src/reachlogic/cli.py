"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 3 no result or a
counterexample.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from .core import DEFAULT_WIDTH
from .interpreter import Exited, Fault, SeededRandom, parse_state, run
from .parser import SourceError, format_predicate, parse_predicate, parse_program
from .predicate import DEFAULT_DOMAIN, Model
from .sat import SatConfig
from .search import Exploration, Limits, SearchGraph, to_dot

OK, INPUT_ERROR, NO_RESULT = 0, 1, 3


@dataclass(frozen=True)
class RunConfig:
    width: int = DEFAULT_WIDTH
    domain: tuple[int, int] = DEFAULT_DOMAIN
    max_depth: int = 8
    max_witnesses: int | None = None
    max_nodes: int = 20_000
    fuel: int = 64
    format: str = "text"
    solver: str | None = None
    seed: int = 0

    @property
    def limits(self) -> Limits:
        return Limits(self.max_depth, self.max_witnesses, self.max_nodes)

    @property
    def sat(self) -> SatConfig:
        tiers = (1, 2, 3) if self.solver else (1, 2)
        return SatConfig(tiers=tiers, domain=self.domain, solver=self.solver, width=self.width)

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "domain": list(self.domain),
            "maxDepth": self.max_depth,
            "maxWitnesses": self.max_witnesses,
            "maxNodes": self.max_nodes,
            "fuel": self.fuel,
            "format": self.format,
            "solver": self.solver,
            "seed": self.seed,
        }


class InputError(Exception):
    pass


def parse_domain(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected lo..hi, got {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo >= hi:
        raise argparse.ArgumentTypeError(f"empty domain {text!r}")
    return lo, hi


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _config(args) -> RunConfig:
    return RunConfig(
        width=args.width,
        domain=args.domain,
        max_depth=args.max_depth,
        max_witnesses=args.max_witnesses,
        max_nodes=args.max_nodes,
        fuel=args.fuel,
        format=args.format,
        solver=args.solver,
        seed=args.seed,
    )


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str, cfg: RunConfig):
    text = _read(path)
    try:
        return parse_program(text, cfg.width)
    except SourceError as exc:
        raise InputError(f"{path}:{exc}") from None


def _pred(text: str, what: str, cfg: RunConfig):
    try:
        return parse_predicate(text, cfg.width)
    except SourceError as exc:
        raise InputError(f"{what}:{exc}") from None


# ---------------------------------------------------------------------------
# Commands


def cmd_gen(args, out: TextIO) -> int:
    cfg = _config(args)
    program = _load(args.program, cfg)
    post = _pred(args.post, "--post", cfg)
    graph = SearchGraph() if cfg.format == "dot" else None
    ex = Exploration(program, post, cfg.limits, cfg.sat, graph)
    found = 0
    if cfg.format == "json":
        out.write(_dump({"config": cfg.to_json(), "program": args.program, "post": format_predicate(post)}) + "\n")
    for i, w in enumerate(ex):
        found += w.satisfiable
        if cfg.format == "json":
            out.write(_dump(w.to_json()) + "\n")
        elif cfg.format == "text":
            model = f"  [{w.model}]" if w.model is not None else ""
            trace = " -> ".join(map(str, w.addrs))
            out.write(f"#{i + 1} depth {w.depth} {trace} {w.to_json()['verdict']}: {format_predicate(w.precondition)}{model}\n")
    if cfg.format == "json":
        out.write(_dump({"report": ex.report.to_json()}) + "\n")
    elif cfg.format == "dot":
        out.write(to_dot(graph))
    else:
        r = ex.report
        out.write(f"{r.emitted} witness(es), {found} satisfiable; {r.expanded} expanded, {r.pruned} pruned, stopped by {r.stopped_by}\n")
    return OK if found else NO_RESULT


def cmd_run(args, out: TextIO) -> int:
    cfg = _config(args)
    program = _load(args.program, cfg)
    try:
        state = parse_state(args.init or "")
    except ValueError as exc:
        raise InputError(f"--init: {exc}") from None
    outcome = run(program, state, SeededRandom(cfg.seed, cfg.domain), cfg.fuel, cfg.width)
    trace = list(outcome.trace)
    if isinstance(outcome, Exited):
        final = Model.from_state(outcome.state)
        if cfg.format == "json":
            out.write(_dump({"config": cfg.to_json(), "outcome": "exited", "state": final.to_json(), "trace": trace}) + "\n")
        else:
            out.write(f"Exited {final}\ntrace {' -> '.join(map(str, trace))}\n")
        return OK
    if isinstance(outcome, Fault):
        if cfg.format == "json":
            out.write(_dump({"config": cfg.to_json(), "outcome": "fault", "kind": outcome.kind, "trace": trace}) + "\n")
        else:
            out.write(f"Fault {outcome.kind} at block {outcome.location[0]}\ntrace {' -> '.join(map(str, trace))}\n")
        return INPUT_ERROR if outcome.kind == "unbound" else NO_RESULT
    if cfg.format == "json":
        out.write(_dump({"config": cfg.to_json(), "outcome": "out-of-fuel", "trace": trace}) + "\n")
    else:
        out.write(f"OutOfFuel after {len(trace)} blocks\n")
    return NO_RESULT


def cmd_check(args, out: TextIO) -> int:
    from .harness.oracle import check_triple

    cfg = _config(args)
    program = _load(args.program, cfg)
    post = _pred(args.post, "--post", cfg)
    pre = _pred(args.pre, "--pre", cfg)
    res = check_triple(program, post, pre, cfg.domain, cfg.fuel, cfg.width)
    cex = Model.from_state(res.counterexample).to_json() if res.counterexample is not None else None
    if cfg.format == "json":
        out.write(_dump({"config": cfg.to_json(), "confirmed": res.confirmed, "checked": res.checked, "counterexample": cex}) + "\n")
    elif res.confirmed:
        out.write(f"confirmed on {res.checked} state(s) of the precondition\n")
    else:
        out.write(f"counterexample: {Model.from_state(res.counterexample)}\n")
    return OK if res.confirmed else NO_RESULT


def cmd_test(args, out: TextIO) -> int:
    from .harness import suites

    cfg = _config(args)
    if args.suite == "litmus":
        rep = suites.litmus_suite()
    elif args.suite == "soundness":
        rep = suites.soundness_suite(count=args.programs or 200, seed=args.seed or 7)
    elif args.suite == "completeness":
        n = args.programs or 100
        rep = suites.completeness_suite(count=n, seed=args.seed or 11, min_valid=n)
    elif args.suite == "quicksort":
        rep = suites.quicksort_study()
    else:
        rep = suites.axioms_suite(seed=args.seed)
    if cfg.format == "json":
        out.write(_dump(rep.to_json()) + "\n")
    else:
        for c in rep.checks:
            out.write(c.line() + "\n")
        for v in rep.violations:
            out.write(f"VIOLATION {v}\n")
        skipped = ", ".join(f"{k}: {n}" for k, n in sorted(rep.skipped.items())) or "none"
        out.write(f"{rep.name}: {'pass' if rep.passed else 'FAIL'} ({rep.checked} checked, skipped {skipped})\n")
    return OK if rep.passed else NO_RESULT


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--width", type=int, default=DEFAULT_WIDTH, help="word width in bits")
    common.add_argument("--domain", type=parse_domain, default=DEFAULT_DOMAIN, help="bounded value domain lo..hi (hi exclusive)")
    common.add_argument("--max-depth", type=int, default=8)
    common.add_argument("--max-witnesses", type=int, default=None)
    common.add_argument("--max-nodes", type=int, default=20_000)
    common.add_argument("--fuel", type=int, default=64)
    common.add_argument("--format", choices=("text", "json", "dot"), default="text")
    common.add_argument("--solver", default=None, help='SMT-LIB solver command, e.g. "z3 -in"')
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(prog="reachlogic", description="Reachability preconditions for jump programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate witness preconditions")
    g.add_argument("program")
    g.add_argument("--post", required=True)
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("run", parents=[common], help="run a program from an initial state")
    r.add_argument("program")
    r.add_argument("--init", default="")
    r.set_defaults(fn=cmd_run)

    c = sub.add_parser("check", parents=[common], help="check a reachability triple by enumeration")
    c.add_argument("program")
    c.add_argument("--post", required=True)
    c.add_argument("--pre", required=True)
    c.set_defaults(fn=cmd_check)

    t = sub.add_parser("test", parents=[common], help="run a harness suite")
    t.add_argument("suite", choices=("litmus", "soundness", "completeness", "axioms", "quicksort"))
    t.add_argument("--programs", type=int, default=None, help="number of random programs")
    t.set_defaults(fn=cmd_test)
    return ap


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    # "--domain -8..8" would otherwise be read as an unknown option
    out: list[str] = []
    it = iter(argv)
    for a in it:
        if a in ("--domain", "--init", "--post", "--pre"):
            value = next(it, None)
            if value is not None and value.startswith("-"):
                out.append(f"{a}={value}")
                continue
            out.append(a)
            if value is not None:
                out.append(value)
        else:
            out.append(a)
    return out


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(_join_negative_values(sys.argv[1:] if argv is None else argv))
    try:
        return args.fn(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
