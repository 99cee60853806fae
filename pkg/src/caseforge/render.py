"""Diagram and outline output for argument graphs.

DOT shapes follow the usual GSN conventions: goals as boxes, strategies as
parallelograms, solutions as circles, contexts as rounded boxes,
assumptions and justifications as ellipses. Undeveloped elements carry a
hollow diamond external label, uninstantiated ones a hollow triangle.
SupportedBy edges get a filled arrowhead, InContextOf a hollow one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .argument import ALL_PHASES, ArgumentGraph, EdgeKind, NodeKind, root_goals
from .canonical import serialize_canonical
from .validator import effective_phases

UNDEVELOPED_MARK = "\u25c7"
UNINSTANTIATED_MARK = "\u25b3"

_SHAPES = {
    NodeKind.GOAL: ("box", ""),
    NodeKind.STRATEGY: ("parallelogram", ""),
    NodeKind.SOLUTION: ("circle", ""),
    NodeKind.CONTEXT: ("box", "rounded"),
    NodeKind.ASSUMPTION: ("ellipse", ""),
    NodeKind.JUSTIFICATION: ("ellipse", ""),
}

_ARROWHEADS = {EdgeKind.SUPPORTED_BY: "normal", EdgeKind.IN_CONTEXT_OF: "empty"}


class RenderFormat(str, Enum):
    DOT = "dot"
    MARKDOWN = "markdown"
    JSON = "json"


@dataclass(frozen=True)
class RenderOptions:
    format: RenderFormat = RenderFormat.DOT
    highlight: frozenset = frozenset()
    show_lifecycle_lanes: bool = False

    def __post_init__(self):
        object.__setattr__(self, "format", RenderFormat(self.format))
        object.__setattr__(self, "highlight", frozenset(self.highlight))


def dot_quote(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"').replace("\r", "").replace("\n", "\\n")
    return f'"{out}"'


def _wrap(text: str, width: int = 32) -> str:
    lines, cur = [], ""
    for word in text.split():
        if cur and len(cur) + 1 + len(word) > width:
            lines.append(cur)
            cur = word
        else:
            cur = f"{cur} {word}" if cur else word
    if cur:
        lines.append(cur)
    return "\n".join(lines)


def _node_line(graph: ArgumentGraph, nid: str, highlight: frozenset) -> str:
    node = graph.nodes[nid]
    shape, style = _SHAPES[node.kind]
    label = nid if not node.statement else f"{nid}\n{_wrap(node.statement)}"
    if node.acp is not None:
        label += f"\n[ACP {node.acp.level.value}: {node.acp.label}]"
    attrs = [f"shape={shape}", f"label={dot_quote(label)}"]
    styles = [style] if style else []
    if nid in highlight:
        styles.append("filled")
        attrs.append('fillcolor="yellow"')
    if styles:
        attrs.append(f"style={dot_quote(','.join(styles))}")
    marks = (UNDEVELOPED_MARK if node.undeveloped else "") + (UNINSTANTIATED_MARK if node.uninstantiated else "")
    if marks:
        attrs.append(f"xlabel={dot_quote(marks)}")
    return f"{dot_quote(nid)} [{' '.join(attrs)}];"


def _lane_assignment(graph: ArgumentGraph) -> dict:
    """Map (hazardous goal, phase) -> node ids; each node lands in one lane."""
    order = {nid: i for i, nid in enumerate(graph.nodes)}
    placed: set = set()
    lanes: dict = {}
    for gid in sorted(graph.metadata.hazardous_event_goals, key=order.__getitem__):
        eff = effective_phases(graph, gid)
        for phase in ALL_PHASES:
            members = []
            for nid in sorted(eff, key=order.__getitem__):
                if nid == gid or nid in placed or phase not in eff[nid]:
                    continue
                if graph.nodes[nid].lifecycle is None and phase is not min(eff[nid], key=ALL_PHASES.index):
                    continue
                members.append(nid)
                placed.add(nid)
            for nid in list(members):
                for s in graph.supporters(nid):
                    if s not in placed and graph.nodes[s].kind is NodeKind.SOLUTION:
                        members.append(s)
                        placed.add(s)
            lanes[(gid, phase)] = sorted(members, key=order.__getitem__)
    return lanes


def render_dot(graph: ArgumentGraph, highlight: Iterable[str] = (), show_lifecycle_lanes: bool = False) -> str:
    """Graphviz DOT text, nodes in id order and edges in key order."""
    highlight = frozenset(highlight)
    if not graph.nodes:
        return 'digraph "caseforge" {\n}\n'
    out = ['digraph "caseforge" {', "  rankdir=TB;", '  node [fontname="Helvetica"];']
    ids = sorted(graph.nodes)
    clustered: set = set()
    if show_lifecycle_lanes:
        for (gid, phase), members in _lane_assignment(graph).items():
            cname = dot_quote(f"cluster_{gid}_{phase.value}")
            out.append(f"  subgraph {cname} {{")
            out.append(f"    label={dot_quote(f'{gid}: {phase.value}')};")
            out.append('    style="dashed";')
            for nid in members:
                out.append("    " + _node_line(graph, nid, highlight))
                clustered.add(nid)
            out.append("  }")
    for nid in ids:
        if nid not in clustered:
            out.append("  " + _node_line(graph, nid, highlight))
    for e in sorted(graph.edges, key=lambda e: e.key):
        out.append(f"  {dot_quote(e.source)} -> {dot_quote(e.target)} [arrowhead={_ARROWHEADS[e.kind]}];")
    out.append("}")
    return "\n".join(out) + "\n"


def _md_label(graph: ArgumentGraph, nid: str, highlight: frozenset) -> str:
    node = graph.nodes[nid]
    text = f"**{nid}** ({node.kind.value})"
    if node.statement:
        text += f" {node.statement}"
    tags = []
    if node.lifecycle is not None:
        tags.append(node.lifecycle.value)
    if nid in graph.metadata.hazardous_event_goals:
        tags.append("hazardous event")
    if node.undeveloped:
        tags.append(f"{UNDEVELOPED_MARK} undeveloped")
    if node.uninstantiated:
        tags.append(f"{UNINSTANTIATED_MARK} uninstantiated")
    if node.evidence_ref is not None:
        tags.append(f"evidence: {node.evidence_ref.uri_or_path}")
    if tags:
        text += " _[" + "; ".join(tags) + "]_"
    if nid in highlight:
        text = f"=> {text}"
    return text


def render_markdown(graph: ArgumentGraph, highlight: Iterable[str] = ()) -> str:
    """Nested bullet outline from each root goal down to the evidence.

    A node reached a second time is listed by id only.
    """
    highlight = frozenset(highlight)
    meta = graph.metadata
    lines = [f"# {meta.system_name or 'Safety case'}"]
    if meta.case_version:
        lines.append(f"Version {meta.case_version}")
    if meta.risk_owner:
        lines.append(f"Risk owner: {meta.risk_owner}")
    lines.append("")
    seen: set = set()

    def walk(nid: str, depth: int) -> None:
        pad = "  " * depth
        if nid in seen:
            lines.append(f"{pad}- {nid} (see above)")
            return
        seen.add(nid)
        lines.append(f"{pad}- {_md_label(graph, nid, highlight)}")
        for c in graph.contexts(nid):
            if c not in seen:
                seen.add(c)
                lines.append(f"{pad}  - in context of: {_md_label(graph, c, highlight)}")
            else:
                lines.append(f"{pad}  - in context of: {c} (see above)")
        for s in graph.supporters(nid):
            walk(s, depth + 1)

    for root in root_goals(graph):
        walk(root, 0)
    rest = [n for n in graph.nodes if n not in seen]
    if rest:
        lines.append("")
        lines.append("Not reachable from a root goal:")
        for nid in rest:
            lines.append(f"- {_md_label(graph, nid, highlight)}")
    return "\n".join(lines) + "\n"


def render(graph: ArgumentGraph, options: RenderOptions = RenderOptions()) -> str:
    if options.format is RenderFormat.DOT:
        return render_dot(graph, options.highlight, options.show_lifecycle_lanes)
    if options.format is RenderFormat.MARKDOWN:
        return render_markdown(graph, options.highlight)
    return serialize_canonical(graph) + "\n"
