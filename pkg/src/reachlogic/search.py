"""Backward breadth-first search from exit blocks to the program entry.

Each node carries a predicate that must hold on entry to its block for
some run to reach an exit satisfying the postcondition.  Nodes that reach
the entry block are reported as witnesses.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from . import precond
from .core import FALSE, IJump, Jump, Program
from .parser import format_predicate
from .predicate import Model, NameSupply, Predicate, all_vars, bound_names, freshen, pred_size
from .sat import Sat, SatConfig, Unknown, Unsat, Verdict, check_sat, prunable
from .simplify import is_false, simplify, simplify_expr

EDGE_ORDER = {"then": 0, "else": 1, "ijump": 2}


@dataclass(frozen=True)
class Step:
    addr: int
    edge: str  # how control leaves ``addr``: then / else / ijump / exit
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class SearchNode:
    at: int
    pred: Predicate
    trace: tuple[Step, ...]
    depth: int
    gid: str = ""  # graph node id, if a graph is being recorded


def verdict_name(v: Verdict) -> str:
    return {Sat: "sat", Unsat: "unsat", Unknown: "unknown"}[type(v)]


@dataclass(frozen=True)
class Witness:
    precondition: Predicate
    trace: tuple[Step, ...]
    depth: int
    verdict: Verdict
    model: Model | None = None

    @property
    def addrs(self) -> list[int]:
        return [s.addr for s in self.trace]

    @property
    def case_tags(self) -> list[str]:
        return [t for s in self.trace for t in s.tags]

    @property
    def satisfiable(self) -> bool:
        return isinstance(self.verdict, Sat)

    def to_json(self) -> dict:
        out = {
            "precondition": format_predicate(self.precondition),
            "trace": self.addrs,
            "caseTags": self.case_tags,
            "depth": self.depth,
            "verdict": verdict_name(self.verdict),
        }
        if self.model is not None:
            out["model"] = self.model.to_json()
        return out


@dataclass(frozen=True)
class Limits:
    max_depth: int = 8
    max_witnesses: int | None = None
    max_nodes: int = 20_000
    max_cases: int = 100_000  # statement-level predicates, bounds store case blow-up
    max_size: int = 5_000  # largest predicate tree, bounds substitution blow-up

    def to_json(self) -> dict:
        return {
            "maxDepth": self.max_depth,
            "maxWitnesses": self.max_witnesses,
            "maxNodes": self.max_nodes,
            "maxCases": self.max_cases,
            "maxSize": self.max_size,
        }


class _Budget(Exception):
    def __init__(self, reason: str):
        self.reason = reason


@dataclass
class Report:
    generated: int = 0
    cases: int = 0
    pruned: int = 0
    expanded: int = 0
    emitted: int = 0
    depth_reached: int = 0
    stopped_by: str = "frontier-empty"

    def to_json(self) -> dict:
        return {
            "generated": self.generated,
            "cases": self.cases,
            "pruned": self.pruned,
            "expanded": self.expanded,
            "emitted": self.emitted,
            "depthReached": self.depth_reached,
            "stoppedBy": self.stopped_by,
        }


@dataclass
class GraphNode:
    gid: str
    label: str
    pruned: bool = False
    witness: bool = False


@dataclass
class SearchGraph:
    """Exploration tree down to statement granularity, for DOT output."""

    nodes: list[GraphNode] = field(default_factory=list)
    edges: list[tuple[str, str, str]] = field(default_factory=list)
    _level_counts: dict[int, int] = field(default_factory=dict)
    _levels: dict[str, int] = field(default_factory=dict)
    _by_id: dict[str, GraphNode] = field(default_factory=dict)

    def add(self, parent: str | None, label: str, edge_label: str = "", pruned: bool = False) -> str:
        level = 0 if parent is None else self._levels[parent] + 1
        index = self._level_counts.get(level, 0)
        self._level_counts[level] = index + 1
        gid = f"n{level}_{index}"
        self._levels[gid] = level
        node = GraphNode(gid, label, pruned)
        self.nodes.append(node)
        self._by_id[gid] = node
        if parent is not None:
            self.edges.append((parent, gid, edge_label))
        return gid

    def node(self, gid: str) -> GraphNode:
        return self._by_id[gid]


def predecessors(p: Program, a: int) -> list[tuple[int, str]]:
    """Edges into ``a`` as ``(block, kind)``, sorted by block then kind.

    Every indirect jump is a potential predecessor; the target equality is
    added later and left to the solver tiers.
    """
    out = []
    for addr, block in p.blocks.items():
        t = block.term
        if isinstance(t, Jump):
            if t.then_addr == a:
                out.append((addr, "then"))
            if t.else_addr == a:
                out.append((addr, "else"))
        elif isinstance(t, IJump):
            out.append((addr, "ijump"))
    out.sort(key=lambda x: (x[0], EDGE_ORDER[x[1]]))
    return out


class Exploration:
    """Lazy search; iterate to receive witnesses, then read :attr:`report`."""

    def __init__(
        self,
        p: Program,
        q: Predicate,
        limits: Limits = Limits(),
        cfg: SatConfig = SatConfig(),
        graph: SearchGraph | None = None,
    ):
        self.program = p
        self.limits = limits
        self.cfg = cfg
        self.graph = graph
        self.report = Report()
        self.names = NameSupply()
        self.names.reserve(bound_names(q))
        self.names.reserve(all_vars(q))
        self.names.reserve(p.variables())
        self.q = freshen(q, self.names)

    # -- node construction -------------------------------------------------

    def _record(self, parent: str | None, raw: Predicate, simple: Predicate, edge: str, pruned: bool) -> str:
        if self.graph is None or (parent is not None and not parent):
            return ""
        label = format_predicate(raw if pruned else simple)
        return self.graph.add(parent, label, edge, pruned)

    def _feasible(self, constraint) -> bool:
        return simplify_expr(constraint, self.cfg.width, truth=True) != FALSE

    def _check_size(self, p: Predicate) -> None:
        # checked before simplifying: hashing or walking a huge tree is what costs
        if pred_size(p) > self.limits.max_size:
            raise _Budget("max-size")

    def _fold(self, stmts, start: list[tuple[Predicate, tuple[str, ...], str]]):
        """Apply the statements right to left; Tier-1 contradictions are dropped."""
        width = self.cfg.width
        current = start
        for s in reversed(stmts):
            nxt = []
            seen = set()
            for pred, tags, gid in current:
                for raw, t in precond.tau_stmt_raw(s, pred, self.names, self._feasible):
                    self.report.cases += 1
                    if self.report.cases > self.limits.max_cases:
                        raise _Budget("max-cases")
                    self._check_size(raw)
                    simple = simplify(raw, width)
                    if is_false(simple):
                        self.report.pruned += 1
                        self._record(gid, raw, simple, "", True)
                        continue
                    if simple in seen:
                        continue
                    seen.add(simple)
                    child = self._record(gid, raw, simple, ", ".join(t), False)
                    nxt.append((simple, t + tags, child))
            current = nxt
        return current

    def _finish(self, at: int, items, rest: tuple[Step, ...], edge: str, depth: int) -> list[SearchNode]:
        out = []
        for pred, tags, gid in items:
            if prunable(pred, self.cfg):
                self.report.pruned += 1
                if self.graph is not None and gid:
                    self.graph.node(gid).pruned = True
                continue
            out.append(SearchNode(at, pred, (Step(at, edge, tags),) + rest, depth, gid))
        return out

    def roots(self) -> list[SearchNode]:
        root_gid = ""
        if self.graph is not None:
            root_gid = self.graph.add(None, format_predicate(self.q))
        out = []
        for addr in self.program.exit_blocks:
            q = simplify(self.q, self.cfg.width)
            if is_false(q):
                self.report.pruned += 1
                continue
            items = self._fold(self.program.blocks[addr].stmts, [(q, (), root_gid)])
            out.extend(self._finish(addr, items, (), "exit", 0))
        return out

    def expand(self, node: SearchNode) -> list[SearchNode]:
        out = []
        for addr, kind in predecessors(self.program, node.at):
            block = self.program.blocks[addr]
            raw = precond.tau_edge(block.term, node.at, node.pred, kind)
            self._check_size(raw)
            simple = simplify(raw, self.cfg.width)
            label = f"{kind} {addr}->{node.at}"
            if is_false(simple):
                self.report.pruned += 1
                self._record(node.gid, raw, simple, label, True)
                continue
            gid = self._record(node.gid, raw, simple, label, False)
            items = self._fold(block.stmts, [(simple, (), gid)])
            out.extend(self._finish(addr, items, node.trace, kind, node.depth + 1))
        return out

    def _witness(self, node: SearchNode) -> Witness:
        verdict = check_sat(node.pred, self.cfg)
        model = verdict.model if isinstance(verdict, Sat) else None
        if self.graph is not None and node.gid:
            self.graph.node(node.gid).witness = True
        return Witness(node.pred, node.trace, node.depth, verdict, model)

    # -- driver ------------------------------------------------------------

    def __iter__(self) -> Iterator[Witness]:
        try:
            yield from self._bfs()
        except _Budget as b:
            self.report.stopped_by = b.reason

    def _bfs(self) -> Iterator[Witness]:
        limits = self.limits
        report = self.report
        frontier: deque[SearchNode] = deque()
        entry = self.program.entry

        def admit(nodes: list[SearchNode]) -> Iterator[Witness]:
            for n in nodes:
                report.generated += 1
                if n.at == entry:
                    report.emitted += 1
                    yield self._witness(n)
                    if limits.max_witnesses is not None and report.emitted >= limits.max_witnesses:
                        report.stopped_by = "max-witnesses"
                        return
                frontier.append(n)

        yield from admit(self.roots())
        if report.stopped_by != "frontier-empty":
            return
        while frontier:
            node = frontier.popleft()
            report.depth_reached = max(report.depth_reached, node.depth)
            if node.depth >= limits.max_depth:
                report.stopped_by = "max-depth"
                continue
            if report.generated >= limits.max_nodes:
                report.stopped_by = "max-nodes"
                return
            report.expanded += 1
            yield from admit(self.expand(node))
            if report.stopped_by == "max-witnesses":
                return


def explore(
    p: Program,
    q: Predicate,
    limits: Limits = Limits(),
    cfg: SatConfig = SatConfig(),
    graph: SearchGraph | None = None,
) -> tuple[list[Witness], Report]:
    ex = Exploration(p, q, limits, cfg, graph)
    witnesses = list(ex)
    return witnesses, ex.report


def roots(p: Program, q: Predicate, cfg: SatConfig = SatConfig()) -> list[SearchNode]:
    return Exploration(p, q, cfg=cfg).roots()


def expand(node: SearchNode, p: Program, cfg: SatConfig = SatConfig()) -> list[SearchNode]:
    ex = Exploration(p, node.pred, cfg=cfg)
    ex.names.reserve(bound_names(node.pred))
    return ex.expand(node)


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(graph: SearchGraph, name: str = "search") -> str:
    lines = [f"digraph {name} {{", "  rankdir=BT;", "  node [shape=box, fontname=monospace];"]
    for n in graph.nodes:
        attrs = [f'label="{_dot_escape(n.label)}"']
        if n.pruned:
            attrs.append('style=dashed, color=red, xlabel="pruned"')
        elif n.witness:
            attrs.append("peripheries=2")
        lines.append(f"  {n.gid} [{', '.join(attrs)}];")
    for src, dst, label in graph.edges:
        extra = f' [label="{_dot_escape(label)}"]' if label else ""
        lines.append(f"  {src} -> {dst}{extra};")
    lines.append("}")
    return "\n".join(lines) + "\n"
