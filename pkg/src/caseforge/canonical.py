"""Canonical JSON interchange (``.case.json``).

Output is byte-stable: keys sorted, nodes sorted by id, edges sorted by
``(kind, from, to)``, compact separators, UTF-8 without ASCII escaping.
"""

from __future__ import annotations

import json
from datetime import date
from pathlib import Path
from typing import Any

from .argument import (
    ArgumentEdge,
    ArgumentGraph,
    ArgumentNode,
    CaseError,
    CaseMetadata,
    ConfidenceAssertion,
    EvidenceRef,
    build_graph,
)
from .dsl import parse

SCHEMA_VERSION = "caseforge/1"


class CaseFormatError(ValueError):
    """A ``.case.json`` document is malformed or has the wrong schema version."""


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def node_to_dict(node: ArgumentNode) -> dict:
    ev = node.evidence_ref
    return {
        "id": node.id,
        "kind": node.kind.value,
        "statement": node.statement,
        "flags": sorted(f.value for f in node.flags),
        "lifecycle": node.lifecycle.value if node.lifecycle else None,
        "acp": {"label": node.acp.label, "level": node.acp.level.value} if node.acp else None,
        "evidence_ref": None
        if ev is None
        else {
            "uri_or_path": ev.uri_or_path,
            "description": ev.description,
            "dated": ev.dated.isoformat() if ev.dated else None,
            "valid_for_days": ev.valid_for_days,
        },
    }


def graph_to_dict(graph: ArgumentGraph) -> dict:
    meta = graph.metadata
    return {
        "version": SCHEMA_VERSION,
        "metadata": {
            "system_name": meta.system_name,
            "case_version": meta.case_version,
            "risk_owner": meta.risk_owner,
            "hazardous_event_goals": sorted(meta.hazardous_event_goals),
        },
        "nodes": [node_to_dict(graph.nodes[k]) for k in sorted(graph.nodes)],
        "edges": [
            {"kind": e.kind.value, "from": e.source, "to": e.target}
            for e in sorted(graph.edges, key=lambda e: e.key)
        ],
    }


def serialize_canonical(graph: ArgumentGraph) -> str:
    return dumps(graph_to_dict(graph))


def _node_from_dict(d: dict) -> ArgumentNode:
    acp = d.get("acp")
    ev = d.get("evidence_ref")
    evidence = None
    if ev is not None:
        dated = ev.get("dated")
        evidence = EvidenceRef(
            ev["uri_or_path"],
            ev.get("description", ""),
            date.fromisoformat(dated) if dated else None,
            ev.get("valid_for_days"),
        )
    return ArgumentNode(
        d["id"],
        d["kind"],
        d.get("statement", ""),
        flags=frozenset(d.get("flags", ())),
        lifecycle=d.get("lifecycle"),
        acp=ConfidenceAssertion(acp["label"], acp["level"]) if acp else None,
        evidence_ref=evidence,
    )


def graph_from_dict(doc: dict) -> ArgumentGraph:
    if not isinstance(doc, dict):
        raise CaseFormatError("case document must be a JSON object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise CaseFormatError(f"unsupported schema version {version!r}, expected {SCHEMA_VERSION!r}")
    try:
        meta = doc.get("metadata") or {}
        metadata = CaseMetadata(
            meta.get("system_name", ""),
            meta.get("case_version", ""),
            meta.get("risk_owner", ""),
            frozenset(meta.get("hazardous_event_goals", ())),
        )
        nodes = [_node_from_dict(n) for n in doc.get("nodes", [])]
        edges = [ArgumentEdge(e["kind"], e["from"], e["to"]) for e in doc.get("edges", [])]
        return build_graph(metadata, nodes, edges)
    except (KeyError, TypeError, ValueError, AttributeError, CaseError) as exc:
        raise CaseFormatError(f"invalid case document: {exc}") from exc


def load_canonical(text: str) -> ArgumentGraph:
    """Inverse of :func:`serialize_canonical`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseFormatError(f"not valid JSON: {exc}") from exc
    return graph_from_dict(doc)


def read_case(path) -> ArgumentGraph:
    """Load a ``.gsn`` or ``.case.json`` file by extension."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.name.endswith(".json"):
        return load_canonical(text)
    return parse(text)
