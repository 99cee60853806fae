"""Typed in-memory model of a GSN safety case.

An :class:`ArgumentGraph` is built once with :func:`build_graph` and never
mutated afterwards; every query in this module is a pure function over it.

Node ids follow ``[A-Za-z][A-Za-z0-9_.-]*``. The usual GSN prefixes
(``G`` goal, ``S`` strategy, ``Sn`` solution, ``C`` context, ``A``
assumption, ``J`` justification) are a convention only.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Optional

ID_PATTERN = re.compile(r"[A-Za-z][A-Za-z0-9_.-]*\Z")
PLACEHOLDER_PATTERN = re.compile(r"\{[^{}]+\}")


class CaseError(Exception):
    """Base class for argument-model errors."""


class DuplicateId(CaseError):
    def __init__(self, node_id: str):
        super().__init__(f"duplicate node id {node_id!r}")
        self.node_id = node_id


class DanglingEdge(CaseError):
    def __init__(self, source: str, target: str):
        super().__init__(f"edge {source!r} -> {target!r} references an unknown node")
        self.source = source
        self.target = target


class SelfLoop(CaseError):
    def __init__(self, node_id: str):
        super().__init__(f"edge from {node_id!r} to itself")
        self.node_id = node_id


class DuplicateEdge(CaseError):
    def __init__(self, edge: "ArgumentEdge"):
        super().__init__(f"duplicate {edge.kind.value} edge {edge.source!r} -> {edge.target!r}")
        self.edge = edge


class UnknownNode(CaseError):
    def __init__(self, node_id: str):
        super().__init__(f"unknown node {node_id!r}")
        self.node_id = node_id


class NotAGoal(CaseError):
    def __init__(self, node_id: str):
        super().__init__(f"node {node_id!r} is not a goal")
        self.node_id = node_id


class NodeKind(str, Enum):
    GOAL = "goal"
    STRATEGY = "strategy"
    SOLUTION = "solution"
    CONTEXT = "context"
    ASSUMPTION = "assumption"
    JUSTIFICATION = "justification"


#: Kinds that only ever appear as the target of an InContextOf edge.
CONTEXTUAL_KINDS = frozenset({NodeKind.CONTEXT, NodeKind.ASSUMPTION, NodeKind.JUSTIFICATION})


class Flag(str, Enum):
    UNDEVELOPED = "undeveloped"
    UNINSTANTIATED = "uninstantiated"
    # reported by developmental_frontier only; never carried by a node
    IMPLICIT_UNDEVELOPED = "implicit-undeveloped"


class LifecyclePhase(str, Enum):
    DEVELOPMENT = "development"
    DEPLOYMENT = "deployment"
    POST_DEPLOYMENT = "post-deployment"


ALL_PHASES = (LifecyclePhase.DEVELOPMENT, LifecyclePhase.DEPLOYMENT, LifecyclePhase.POST_DEPLOYMENT)


class ConfidenceLevel(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"

    @property
    def rank(self) -> int:
        return ("low", "medium", "high").index(self.value)


class EdgeKind(str, Enum):
    SUPPORTED_BY = "supported_by"
    IN_CONTEXT_OF = "in_context_of"


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a construct in DSL source text."""

    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"invalid source span {self!r}")


@dataclass(frozen=True)
class ConfidenceAssertion:
    """Assurance claim point: a confidence statement attached to one claim."""

    label: str
    level: ConfidenceLevel

    def __post_init__(self):
        object.__setattr__(self, "level", ConfidenceLevel(self.level))


@dataclass(frozen=True)
class EvidenceRef:
    """Pointer to an evidence artifact. Absent ``dated`` means never stale."""

    uri_or_path: str
    description: str = ""
    dated: Optional[date] = None
    valid_for_days: Optional[int] = None

    def __post_init__(self):
        if self.valid_for_days is not None:
            if self.dated is None:
                raise ValueError("valid_for_days requires a dated evidence reference")
            if isinstance(self.valid_for_days, bool) or self.valid_for_days < 1:
                raise ValueError(f"valid_for_days must be a positive integer, got {self.valid_for_days!r}")

    def expired(self, today: date) -> bool:
        if self.dated is None or self.valid_for_days is None:
            return False
        return self.dated.toordinal() + self.valid_for_days < today.toordinal()


@dataclass(frozen=True)
class ArgumentNode:
    """One GSN element.

    Construction enforces the kind-level invariants (evidence only on
    solutions, lifecycle tags only on goals and strategies). Whether an
    uninstantiated statement really carries a ``{placeholder}`` is left to
    the validator (rule R08) so that the finding can be reported rather than
    thrown.
    """

    id: str
    kind: NodeKind
    statement: str = ""
    flags: frozenset = frozenset()
    lifecycle: Optional[LifecyclePhase] = None
    acp: Optional[ConfidenceAssertion] = None
    evidence_ref: Optional[EvidenceRef] = None
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.id, str) or not ID_PATTERN.match(self.id):
            raise ValueError(f"invalid node id {self.id!r}")
        object.__setattr__(self, "kind", NodeKind(self.kind))
        flags = frozenset(Flag(f) for f in self.flags)
        if Flag.IMPLICIT_UNDEVELOPED in flags:
            raise ValueError("implicit-undeveloped is a derived marker, not a node flag")
        object.__setattr__(self, "flags", flags)
        if self.lifecycle is not None:
            object.__setattr__(self, "lifecycle", LifecyclePhase(self.lifecycle))
            if self.kind not in (NodeKind.GOAL, NodeKind.STRATEGY):
                raise ValueError(f"{self.id}: lifecycle tag is only allowed on goals and strategies")
        if self.evidence_ref is not None and self.kind is not NodeKind.SOLUTION:
            raise ValueError(f"{self.id}: evidence reference is only allowed on solutions")

    @property
    def undeveloped(self) -> bool:
        return Flag.UNDEVELOPED in self.flags

    @property
    def uninstantiated(self) -> bool:
        return Flag.UNINSTANTIATED in self.flags


@dataclass(frozen=True)
class ArgumentEdge:
    kind: EdgeKind
    source: str
    target: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", EdgeKind(self.kind))

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.kind.value, self.source, self.target)


@dataclass(frozen=True)
class CaseMetadata:
    system_name: str = ""
    case_version: str = ""
    risk_owner: str = ""
    hazardous_event_goals: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "hazardous_event_goals", frozenset(self.hazardous_event_goals))


@dataclass(frozen=True)
class ArgumentGraph:
    """A parsed safety case. Build it with :func:`build_graph`."""

    metadata: CaseMetadata
    nodes: MappingProxyType
    edges: tuple

    def node(self, node_id: str) -> ArgumentNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    @cached_property
    def _children(self) -> dict[str, dict[EdgeKind, list[str]]]:
        out = {nid: {EdgeKind.SUPPORTED_BY: [], EdgeKind.IN_CONTEXT_OF: []} for nid in self.nodes}
        for e in self.edges:
            out[e.source][e.kind].append(e.target)
        return out

    @cached_property
    def _parents(self) -> dict[str, dict[EdgeKind, list[str]]]:
        out = {nid: {EdgeKind.SUPPORTED_BY: [], EdgeKind.IN_CONTEXT_OF: []} for nid in self.nodes}
        for e in self.edges:
            out[e.target][e.kind].append(e.source)
        return out

    def supporters(self, node_id: str) -> list[str]:
        """Targets of SupportedBy edges leaving ``node_id``, in edge order."""
        return self._children[node_id][EdgeKind.SUPPORTED_BY]

    def supported(self, node_id: str) -> list[str]:
        """Sources of SupportedBy edges entering ``node_id``."""
        return self._parents[node_id][EdgeKind.SUPPORTED_BY]

    def contexts(self, node_id: str) -> list[str]:
        return self._children[node_id][EdgeKind.IN_CONTEXT_OF]

    def context_users(self, node_id: str) -> list[str]:
        return self._parents[node_id][EdgeKind.IN_CONTEXT_OF]

    def of_kind(self, *kinds: NodeKind) -> list[ArgumentNode]:
        return [n for n in self.nodes.values() if n.kind in kinds]

    def without(self, node_id: str) -> "ArgumentGraph":
        """Copy of the graph with one node and its incident edges removed."""
        self.node(node_id)
        meta = self.metadata
        return build_graph(
            CaseMetadata(
                meta.system_name,
                meta.case_version,
                meta.risk_owner,
                meta.hazardous_event_goals - {node_id},
            ),
            [n for n in self.nodes.values() if n.id != node_id],
            [e for e in self.edges if node_id not in (e.source, e.target)],
        )


def build_graph(
    metadata: CaseMetadata,
    nodes: Iterable[ArgumentNode],
    edges: Iterable[ArgumentEdge],
) -> ArgumentGraph:
    """Assemble a graph, checking only id uniqueness and edge endpoints.

    Raises:
        DuplicateId, DanglingEdge, SelfLoop, DuplicateEdge: on malformed input.
        UnknownNode, NotAGoal: when a hazardous-event goal does not resolve.
    """
    by_id: dict[str, ArgumentNode] = {}
    for n in nodes:
        if n.id in by_id:
            raise DuplicateId(n.id)
        by_id[n.id] = n
    seen: set[tuple[str, str, str]] = set()
    edge_list = []
    for e in edges:
        if e.source == e.target:
            raise SelfLoop(e.source)
        if e.source not in by_id or e.target not in by_id:
            raise DanglingEdge(e.source, e.target)
        if e.key in seen:
            raise DuplicateEdge(e)
        seen.add(e.key)
        edge_list.append(e)
    for gid in sorted(metadata.hazardous_event_goals):
        if gid not in by_id:
            raise UnknownNode(gid)
        if by_id[gid].kind is not NodeKind.GOAL:
            raise NotAGoal(gid)
    return ArgumentGraph(metadata, MappingProxyType(by_id), tuple(edge_list))


def _require_goal(graph: ArgumentGraph, goal_id: str) -> None:
    if graph.node(goal_id).kind is not NodeKind.GOAL:
        raise NotAGoal(goal_id)


def supported_closure(graph: ArgumentGraph, goal_id: str) -> set[str]:
    """All nodes reachable from ``goal_id`` over SupportedBy edges, inclusive."""
    _require_goal(graph, goal_id)
    seen = {goal_id}
    stack = [goal_id]
    while stack:
        for child in graph.supporters(stack.pop()):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return seen


def shortest_support_paths(graph: ArgumentGraph, start: str) -> dict[str, tuple[str, ...]]:
    """BFS over SupportedBy edges; ties broken by edge insertion order."""
    paths = {start: (start,)}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for child in graph.supporters(current):
            if child not in paths:
                paths[child] = paths[current] + (child,)
                queue.append(child)
    return paths


def root_goals(graph: ArgumentGraph) -> list[str]:
    """Goals nobody supports, in insertion order."""
    return [n.id for n in graph.of_kind(NodeKind.GOAL) if not graph.supported(n.id)]


def developmental_frontier(graph: ArgumentGraph) -> list[tuple[str, frozenset]]:
    """Nodes still awaiting development.

    Flagged nodes are reported with their flags; unflagged goals lacking any
    SupportedBy child are reported as ``Flag.IMPLICIT_UNDEVELOPED``.
    """
    out = []
    for n in graph.nodes.values():
        flags = n.flags & {Flag.UNDEVELOPED, Flag.UNINSTANTIATED}
        if n.kind is NodeKind.GOAL and not n.undeveloped and not graph.supporters(n.id):
            flags = flags | {Flag.IMPLICIT_UNDEVELOPED}
        if flags:
            out.append((n.id, frozenset(flags)))
    return out
