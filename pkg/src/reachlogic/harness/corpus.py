"""Bundled programs with their postconditions and expectations."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..parser import parse_predicate, parse_program
from ..predicate import Predicate
from ..core import Program
from ..sat import SatConfig
from ..search import Limits
from .oracle import StateSpace

LITMUS = ("doublestore", "division", "ndloop", "indirect")


@dataclass(frozen=True)
class CorpusCase:
    name: str
    program_text: str
    post_text: str
    expect: dict

    @property
    def program(self) -> Program:
        return parse_program(self.program_text)

    @property
    def post(self) -> Predicate:
        return parse_predicate(self.post_text)

    @property
    def limits(self) -> Limits:
        lim = self.expect.get("limits", {})
        return Limits(
            max_depth=lim.get("maxDepth", 8),
            max_witnesses=lim.get("maxWitnesses"),
            max_nodes=lim.get("maxNodes", 20_000),
            max_cases=lim.get("maxCases", Limits.max_cases),
            max_size=lim.get("maxSize", Limits.max_size),
        )

    @property
    def sat_config(self) -> SatConfig:
        sat = self.expect.get("sat", {})
        return SatConfig(
            tiers=tuple(sat.get("tiers", (1, 2))),
            domain=tuple(sat.get("domain", (-8, 8))),
            node_budget=sat.get("nodeBudget", 200_000),
        )

    @property
    def domain(self) -> tuple[int, int]:
        return self.sat_config.domain

    @property
    def fuel(self) -> int:
        return self.expect.get("fuel", 32)

    @property
    def space(self) -> StateSpace:
        sp = self.expect.get("space", {})
        vars = {k: tuple(v) for k, v in sp.get("vars", {}).items()}
        cells = {int(a): tuple(v) for a, v in sp.get("cells", {}).items()}
        return StateSpace.of(vars, cells)

    @property
    def litmus(self) -> bool:
        return bool(self.expect.get("litmus"))


def case_names() -> list[str]:
    root = resources.files("reachlogic") / "corpus"
    return sorted(p.name for p in root.iterdir() if p.is_dir() and (p / "program.jmp").is_file())


def load_case(name: str) -> CorpusCase:
    root = resources.files("reachlogic") / "corpus" / name
    return CorpusCase(
        name,
        (root / "program.jmp").read_text(),
        (root / "post.pred").read_text().strip(),
        json.loads((root / "expect.json").read_text()),
    )


def load_corpus(names=None) -> list[CorpusCase]:
    return [load_case(n) for n in (names or case_names())]
