"""Structural rules, lints and through-life coverage for argument graphs.

Rule catalogue
--------------
=====  ========  ==========================================================
R01    error     exactly one root goal
R02    error     SupportedBy edges are acyclic
R03    error     edge kinds connect legal node kinds (table below)
R04    error     solutions have no outgoing SupportedBy edge
R05    error     every leaf goal is supported or flagged undeveloped
R06    error     every strategy supports at least one goal, unless undeveloped
R07    error     context/assumption/justification never on a SupportedBy edge
R08    error     uninstantiated statements contain a ``{placeholder}``
R09    warning   node unreachable from the root goal
R10    warning   solution without an evidence reference
L01    warning   shallow or hazardous-event goal backed only by solutions
L02    warning   evidence past its validity window
L03    info      context/assumption/justification attached to nothing
L04    warning   root goal has no context defining its terms
COV01  error     hazardous-event goal lacks support in a lifecycle phase
COV02  warning   a phase is covered only by undeveloped elements
=====  ========  ==========================================================

Legal edges: SupportedBy goal->goal, goal->strategy, goal->solution,
strategy->goal; InContextOf from a goal or strategy to a context,
assumption or justification. R03 skips edges already reported by R04/R07.
Diagnostics are sorted by (severity, code, first node id).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Iterable, Optional, Sequence

from .argument import (
    ALL_PHASES,
    CONTEXTUAL_KINDS,
    PLACEHOLDER_PATTERN,
    ArgumentGraph,
    CaseError,
    EdgeKind,
    EvidenceRef,
    LifecyclePhase,
    NodeKind,
    UnknownNode,
    NotAGoal,
    root_goals,
    shortest_support_paths,
    supported_closure,
)


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"

    @property
    def rank(self) -> int:
        return _SEVERITY_RANK[self]


_SEVERITY_RANK = {Severity.ERROR: 0, Severity.WARNING: 1, Severity.INFO: 2}

RULES: dict[str, Severity] = {
    "R01": Severity.ERROR,
    "R02": Severity.ERROR,
    "R03": Severity.ERROR,
    "R04": Severity.ERROR,
    "R05": Severity.ERROR,
    "R06": Severity.ERROR,
    "R07": Severity.ERROR,
    "R08": Severity.ERROR,
    "R09": Severity.WARNING,
    "R10": Severity.WARNING,
    "L01": Severity.WARNING,
    "L02": Severity.WARNING,
    "L03": Severity.INFO,
    "L04": Severity.WARNING,
    "COV01": Severity.ERROR,
    "COV02": Severity.WARNING,
}

LEGAL_SUPPORT = frozenset(
    {
        (NodeKind.GOAL, NodeKind.GOAL),
        (NodeKind.GOAL, NodeKind.STRATEGY),
        (NodeKind.GOAL, NodeKind.SOLUTION),
        (NodeKind.STRATEGY, NodeKind.GOAL),
    }
)


class PreconditionFailed(CaseError):
    """Coverage needs a single root and an acyclic support relation."""


class CannotRemoveRoot(CaseError):
    def __init__(self, node_id: str):
        super().__init__(f"{node_id!r} is the sole root goal")
        self.node_id = node_id


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    nodes: tuple
    message: str

    def __post_init__(self):
        if self.code not in RULES:
            raise ValueError(f"unknown rule code {self.code!r}")
        object.__setattr__(self, "nodes", tuple(self.nodes))

    @property
    def sort_key(self):
        return (self.severity.rank, self.code, self.nodes[0] if self.nodes else "", self.nodes, self.message)

    def to_dict(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "nodes": list(self.nodes),
            "message": self.message,
        }


def _diag(code: str, nodes: Iterable[str], message: str) -> Diagnostic:
    return Diagnostic(RULES[code], code, tuple(nodes), message)


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: d.sort_key)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)


# --------------------------------------------------------------------------
# Structure
# --------------------------------------------------------------------------


def support_cycles(graph: ArgumentGraph) -> list[list[str]]:
    """Non-trivial strongly connected components of the SupportedBy relation.

    Iterative Tarjan; components are listed in graph insertion order.
    """
    order = {nid: i for i, nid in enumerate(graph.nodes)}
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0
    for start in graph.nodes:
        if start in index:
            continue
        work = [(start, iter(graph.supporters(start)))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, it = work[-1]
            advanced = False
            for child in it:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(graph.supporters(child))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                if len(comp) > 1:
                    comps.append(sorted(comp, key=order.__getitem__))
    comps.sort(key=lambda c: order[c[0]])
    return comps


def _reachable(graph: ArgumentGraph, starts: Iterable[str]) -> set[str]:
    seen = set()
    stack = [s for s in starts if s in graph.nodes]
    seen.update(stack)
    while stack:
        nid = stack.pop()
        for child in graph.supporters(nid) + graph.contexts(nid):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return seen


def _implicitly_undeveloped(graph: ArgumentGraph) -> list[str]:
    return [
        n.id
        for n in graph.of_kind(NodeKind.GOAL)
        if not n.undeveloped and not graph.supporters(n.id)
    ]


def check_structure(graph: ArgumentGraph) -> list[Diagnostic]:
    """Apply rules R01-R10 and return every finding, sorted."""
    out: list[Diagnostic] = []
    nodes = graph.nodes
    roots = root_goals(graph)

    if nodes and len(roots) != 1:
        if roots:
            out.append(_diag("R01", roots, f"expected exactly one root goal, found {len(roots)}: {', '.join(roots)}"))
        else:
            out.append(_diag("R01", [], "no root goal: every goal is supported by another element"))

    for comp in support_cycles(graph):
        out.append(_diag("R02", comp, "SupportedBy cycle through " + " -> ".join(comp + [comp[0]])))

    for e in graph.edges:
        src, dst = nodes[e.source], nodes[e.target]
        if e.kind is EdgeKind.SUPPORTED_BY:
            if src.kind is NodeKind.SOLUTION:
                out.append(_diag("R04", [src.id, dst.id], f"solution {src.id} cannot be supported by {dst.id}"))
                continue
            if src.kind in CONTEXTUAL_KINDS or dst.kind in CONTEXTUAL_KINDS:
                bad = src if src.kind in CONTEXTUAL_KINDS else dst
                out.append(
                    _diag("R07", [bad.id, src.id if bad is dst else dst.id],
                          f"{bad.kind.value} {bad.id} used on a SupportedBy edge; link it with <-ctx")
                )
                continue
            if (src.kind, dst.kind) not in LEGAL_SUPPORT:
                out.append(
                    _diag("R03", [src.id, dst.id],
                          f"{src.kind.value} {src.id} cannot be supported by {dst.kind.value} {dst.id}")
                )
        else:
            if src.kind not in (NodeKind.GOAL, NodeKind.STRATEGY) or dst.kind not in CONTEXTUAL_KINDS:
                out.append(
                    _diag("R03", [src.id, dst.id],
                          f"{src.kind.value} {src.id} cannot be in context of {dst.kind.value} {dst.id}")
                )

    for gid in _implicitly_undeveloped(graph):
        out.append(_diag("R05", [gid], f"goal {gid} has no support and is not flagged undeveloped"))

    for s in graph.of_kind(NodeKind.STRATEGY):
        if s.undeveloped:
            continue
        if not any(nodes[c].kind is NodeKind.GOAL for c in graph.supporters(s.id)):
            out.append(_diag("R06", [s.id], f"strategy {s.id} supports no goal and is not flagged undeveloped"))

    for n in nodes.values():
        if n.uninstantiated and not PLACEHOLDER_PATTERN.search(n.statement):
            out.append(_diag("R08", [n.id], f"{n.id} is uninstantiated but its statement has no {{placeholder}}"))

    if roots:
        reach = _reachable(graph, roots)
        for nid in nodes:
            if nid not in reach:
                out.append(_diag("R09", [nid], f"{nid} is unreachable from the root goal"))

    for n in graph.of_kind(NodeKind.SOLUTION):
        if n.evidence_ref is None:
            out.append(_diag("R10", [n.id], f"solution {n.id} has no evidence reference"))

    return sort_diagnostics(out)


# --------------------------------------------------------------------------
# Lints
# --------------------------------------------------------------------------


def goal_depths(graph: ArgumentGraph) -> dict[str, int]:
    """Shortest SupportedBy distance from any root goal."""
    depth: dict[str, int] = {}
    queue = deque()
    for r in root_goals(graph):
        depth[r] = 0
        queue.append(r)
    while queue:
        nid = queue.popleft()
        for child in graph.supporters(nid):
            if child not in depth:
                depth[child] = depth[nid] + 1
                queue.append(child)
    return depth


def lint(
    graph: ArgumentGraph,
    today: date,
    *,
    max_depth: int = 2,
    disabled: Iterable[str] = (),
) -> list[Diagnostic]:
    """Lints L01-L04. ``max_depth`` bounds which goals L01 treats as shallow."""
    disabled = set(disabled)
    out: list[Diagnostic] = []
    nodes = graph.nodes
    hazardous = graph.metadata.hazardous_event_goals

    depth = goal_depths(graph)
    for g in graph.of_kind(NodeKind.GOAL):
        if g.id not in hazardous and depth.get(g.id, max_depth + 1) > max_depth:
            continue
        kids = graph.supporters(g.id)
        sols = [c for c in kids if nodes[c].kind is NodeKind.SOLUTION]
        argued = any(nodes[c].kind in (NodeKind.STRATEGY, NodeKind.GOAL) for c in kids)
        if sols and not argued:
            why = "hazardous-event goal" if g.id in hazardous else f"goal at depth {depth[g.id]}"
            out.append(
                _diag("L01", [g.id, *sols],
                      f"{why} {g.id} is supported directly by evidence ({', '.join(sols)}) with no argument")
            )

    for n in graph.of_kind(NodeKind.SOLUTION):
        ev: Optional[EvidenceRef] = n.evidence_ref
        if ev is not None and ev.expired(today):
            out.append(
                _diag("L02", [n.id],
                      f"evidence for {n.id} dated {ev.dated.isoformat()} expired after {ev.valid_for_days} days")
            )

    for n in graph.of_kind(*CONTEXTUAL_KINDS):
        if not graph.context_users(n.id):
            out.append(_diag("L03", [n.id], f"{n.kind.value} {n.id} is not attached to any goal or strategy"))

    for r in root_goals(graph):
        if not any(nodes[c].kind is NodeKind.CONTEXT for c in graph.contexts(r)):
            out.append(_diag("L04", [r], f"root goal {r} has no context defining its key terms"))

    return sort_diagnostics(d for d in out if d.code not in disabled)


# --------------------------------------------------------------------------
# Coverage
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageReport:
    buckets: dict
    missing: frozenset
    required: tuple = ALL_PHASES
    diagnostics: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "buckets": {
                g: {p.value: list(ids) for p, ids in phases.items()} for g, phases in sorted(self.buckets.items())
            },
            "missing": [[g, p.value] for g, p in sorted(self.missing, key=lambda m: (m[0], ALL_PHASES.index(m[1])))],
            "required": [p.value for p in self.required],
        }


def effective_phases(graph: ArgumentGraph, goal_id: str) -> dict[str, frozenset]:
    """Phase tags inside one goal's support closure, with inheritance."""
    keep = (NodeKind.GOAL, NodeKind.STRATEGY)
    members = [n for n in supported_closure(graph, goal_id) if graph.nodes[n].kind in keep]
    member_set = set(members)
    indeg = {n: 0 for n in members}
    for n in members:
        for c in graph.supporters(n):
            if c in member_set and c != goal_id:
                indeg[c] += 1
    order = {nid: i for i, nid in enumerate(graph.nodes)}
    ready = sorted((n for n in members if indeg[n] == 0), key=order.__getitem__)
    phases: dict[str, set] = {n: set() for n in members}
    done: dict[str, frozenset] = {}
    queue = deque(ready)
    while queue:
        n = queue.popleft()
        tag = graph.nodes[n].lifecycle
        eff = frozenset({tag}) if tag is not None else frozenset(phases[n])
        done[n] = eff
        for c in graph.supporters(n):
            if c in member_set and c != goal_id:
                phases[c] |= eff
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
    return done


def _coverage(graph: ArgumentGraph, required: Sequence[LifecyclePhase]) -> CoverageReport:
    required = tuple(LifecyclePhase(p) for p in required)
    order = {nid: i for i, nid in enumerate(graph.nodes)}
    buckets: dict[str, dict] = {}
    missing = set()
    diags: list[Diagnostic] = []
    for gid in sorted(graph.metadata.hazardous_event_goals, key=order.__getitem__):
        eff = effective_phases(graph, gid)
        per_phase = {}
        for phase in ALL_PHASES:
            per_phase[phase] = tuple(sorted((n for n, ps in eff.items() if phase in ps), key=order.__getitem__))
        buckets[gid] = per_phase
        for phase in required:
            ids = per_phase[phase]
            if not ids:
                missing.add((gid, phase))
                diags.append(_diag("COV01", [gid], f"hazardous event {gid} has no {phase.value} support"))
            elif all(graph.nodes[n].undeveloped for n in ids):
                diags.append(
                    _diag("COV02", [gid, *ids], f"{phase.value} support for {gid} consists only of undeveloped elements")
                )
    return CoverageReport(buckets, frozenset(missing), required, tuple(sort_diagnostics(diags)))


def check_lifecycle_coverage(
    graph: ArgumentGraph, phases: Sequence[LifecyclePhase] = ALL_PHASES
) -> CoverageReport:
    """Bucket each hazardous-event goal's support by lifecycle phase.

    Untagged goals and strategies inherit the phase of their nearest tagged
    ancestor inside the hazardous-event subtree.

    Raises:
        PreconditionFailed: the graph has no single root goal or has a
            SupportedBy cycle.
    """
    if graph.nodes and len(root_goals(graph)) != 1:
        raise PreconditionFailed("coverage requires exactly one root goal (R01)")
    if support_cycles(graph):
        raise PreconditionFailed("coverage requires acyclic SupportedBy edges (R02)")
    return _coverage(graph, phases)


# --------------------------------------------------------------------------
# Evidence tracing and impact analysis
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EvidenceTrace:
    solution: str
    evidence: Optional[EvidenceRef]
    path: tuple


def trace_evidence(graph: ArgumentGraph, goal_id: str) -> list[EvidenceTrace]:
    """Every solution under ``goal_id`` with one shortest support path."""
    node = graph.node(goal_id)
    if node.kind is not NodeKind.GOAL:
        raise NotAGoal(goal_id)
    paths = shortest_support_paths(graph, goal_id)
    return [
        EvidenceTrace(sid, graph.nodes[sid].evidence_ref, paths[sid])
        for sid in sorted(paths)
        if graph.nodes[sid].kind is NodeKind.SOLUTION
    ]


@dataclass(frozen=True)
class ImpactReport:
    removed: str
    newly_undeveloped: tuple
    newly_uncovered: tuple
    orphaned: tuple

    @property
    def empty(self) -> bool:
        return not (self.newly_undeveloped or self.newly_uncovered or self.orphaned)

    def to_dict(self) -> dict:
        return {
            "removed": self.removed,
            "newly_undeveloped": list(self.newly_undeveloped),
            "newly_uncovered": [[g, p.value] for g, p in self.newly_uncovered],
            "orphaned": list(self.orphaned),
        }


def what_if_remove(
    graph: ArgumentGraph, node_id: str, phases: Sequence[LifecyclePhase] = ALL_PHASES
) -> ImpactReport:
    """What breaks if ``node_id`` and its edges were deleted.

    Orphans are nodes the original root goals reach before the removal but
    not after it. The input graph is left untouched.

    Raises:
        UnknownNode, CannotRemoveRoot, PreconditionFailed (support cycle).
    """
    if node_id not in graph.nodes:
        raise UnknownNode(node_id)
    roots = root_goals(graph)
    if roots == [node_id]:
        raise CannotRemoveRoot(node_id)
    if support_cycles(graph):
        raise PreconditionFailed("impact analysis requires acyclic SupportedBy edges (R02)")
    after = graph.without(node_id)

    before_undev = set(_implicitly_undeveloped(graph))
    newly_undeveloped = tuple(g for g in _implicitly_undeveloped(after) if g not in before_undev)

    before_missing = _coverage(graph, phases).missing
    after_missing = _coverage(after, phases).missing
    order = {nid: i for i, nid in enumerate(graph.nodes)}
    newly_uncovered = tuple(
        sorted(after_missing - before_missing, key=lambda m: (order[m[0]], ALL_PHASES.index(m[1])))
    )

    kept_roots = [r for r in roots if r != node_id]
    lost = _reachable(graph, roots) - _reachable(after, kept_roots) - {node_id}
    orphaned = tuple(sorted(lost, key=order.__getitem__))
    return ImpactReport(node_id, newly_undeveloped, newly_uncovered, orphaned)


# --------------------------------------------------------------------------
# Whole-case check
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    diagnostics: tuple
    coverage: Optional[CoverageReport]

    @property
    def passed(self) -> bool:
        if has_errors(self.diagnostics):
            return False
        return self.coverage is not None and not self.coverage.missing


def check_case(
    graph: ArgumentGraph,
    today: date,
    *,
    phases: Sequence[LifecyclePhase] = ALL_PHASES,
    max_depth: int = 2,
    disabled: Iterable[str] = (),
) -> CheckResult:
    """Structure + lint + coverage, the full pass/fail gate."""
    disabled = set(disabled)
    diags = [d for d in check_structure(graph) if d.code not in disabled]
    diags += lint(graph, today, max_depth=max_depth, disabled=disabled)
    coverage = None
    try:
        coverage = check_lifecycle_coverage(graph, phases)
        diags += [d for d in coverage.diagnostics if d.code not in disabled]
    except PreconditionFailed:
        pass
    return CheckResult(tuple(sort_diagnostics(diags)), coverage)
