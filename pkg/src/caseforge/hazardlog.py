"""Through-life hazard log backed by a single ``*.hazlog.json`` file.

Each entry moves through a small status machine::

    Open -> UnderMitigation -> ResidualAccepted -> Closed
    Open -> Closed                     (initial risk already acceptable / eliminated)
    UnderMitigation -> Closed          (broadly acceptable or eliminated)
    UnderMitigation -> UnderMitigation (further measures)

Every mutation appends a ``{revision, timestamp, op, payload}`` event to
the journal stored alongside the entries; :func:`replay` rebuilds the entry
set from the journal alone. Writes go through a temp file and
``os.replace``; a store whose on-disk revision moved since it was loaded
refuses to save (:class:`StaleWrite`).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from .argument import ArgumentGraph, NodeKind
from .risk import MeasureKind, RiskRecord, RiskReductionMeasure, RiskZone

SCHEMA_VERSION = "caseforge-hazlog/1"


class HazardLogError(Exception):
    pass


class DuplicateHazardId(HazardLogError):
    pass


class UnknownGoal(HazardLogError):
    pass


class UnknownEntry(HazardLogError):
    pass


class IllegalTransition(HazardLogError):
    def __init__(self, status: "Status", reason: str = ""):
        msg = f"illegal transition from {status.value}"
        super().__init__(f"{msg}: {reason}" if reason else msg)
        self.status = status
        self.reason = reason


class WrongOwner(HazardLogError):
    pass


class NothingToAccept(HazardLogError):
    pass


class StaleWrite(HazardLogError):
    pass


class HazardLogFormatError(HazardLogError, ValueError):
    pass


class Status(str, Enum):
    OPEN = "open"
    UNDER_MITIGATION = "under-mitigation"
    RESIDUAL_ACCEPTED = "residual-accepted"
    CLOSED = "closed"


LEGAL_TRANSITIONS = frozenset(
    {
        (Status.OPEN, Status.UNDER_MITIGATION),
        (Status.UNDER_MITIGATION, Status.UNDER_MITIGATION),
        (Status.UNDER_MITIGATION, Status.RESIDUAL_ACCEPTED),
        (Status.UNDER_MITIGATION, Status.CLOSED),
        (Status.RESIDUAL_ACCEPTED, Status.CLOSED),
        (Status.OPEN, Status.CLOSED),
    }
)


def _ts(when: datetime) -> str:
    if when.tzinfo is None:
        when = when.replace(tzinfo=timezone.utc)
    return when.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _now(now: Optional[datetime]) -> str:
    return _ts(now if now is not None else datetime.now(timezone.utc))


@dataclass(frozen=True)
class AcceptanceRecord:
    owner: str
    rationale: str
    timestamp: str

    def __post_init__(self):
        if not self.owner.strip():
            raise ValueError("acceptance owner must be non-empty")
        if not self.rationale.strip():
            raise ValueError("acceptance rationale must be non-empty")


@dataclass(frozen=True)
class HazardLogEntry:
    id: str
    hazard: str
    hazardous_event_goal: Optional[str]
    status: Status
    risk_history: tuple = ()
    measures: tuple = ()
    acceptance: Optional[AcceptanceRecord] = None
    created: str = ""
    updated: str = ""

    @property
    def latest(self) -> Optional[RiskRecord]:
        return self.risk_history[-1] if self.risk_history else None

    @property
    def eliminated(self) -> bool:
        return self.latest is not None and self.latest.eliminated

    def to_dict(self) -> dict:
        acc = self.acceptance
        return {
            "id": self.id,
            "hazard": self.hazard,
            "hazardous_event_goal": self.hazardous_event_goal,
            "status": self.status.value,
            "risk_history": [r.to_dict() for r in self.risk_history],
            "measures": list(self.measures),
            "acceptance": None if acc is None else {
                "owner": acc.owner, "rationale": acc.rationale, "timestamp": acc.timestamp,
            },
            "created": self.created,
            "updated": self.updated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HazardLogEntry":
        acc = d.get("acceptance")
        return cls(
            d["id"],
            d["hazard"],
            d.get("hazardous_event_goal"),
            Status(d["status"]),
            tuple(RiskRecord.from_dict(r) for r in d.get("risk_history", [])),
            tuple(d.get("measures", [])),
            AcceptanceRecord(acc["owner"], acc["rationale"], acc["timestamp"]) if acc else None,
            d.get("created", ""),
            d.get("updated", ""),
        )


# --------------------------------------------------------------------------
# Pure transitions (shared by live operations and journal replay)
# --------------------------------------------------------------------------


def _transition(entry: HazardLogEntry, target: Status) -> None:
    if (entry.status, target) not in LEGAL_TRANSITIONS:
        raise IllegalTransition(entry.status, f"cannot move to {target.value}")


def _apply_event(entries: dict, event: dict) -> None:
    op, p, ts = event["op"], event["payload"], event["timestamp"]
    if op == "open":
        entry = HazardLogEntry.from_dict(p["entry"])
        entries[entry.id] = entry
        return
    entry = entries[p["entry"]]
    if op == "measure":
        entries[entry.id] = replace(
            entry,
            status=Status.UNDER_MITIGATION,
            measures=entry.measures + (p["measure"]["id"],),
            risk_history=entry.risk_history + (RiskRecord.from_dict(p["resulting"]),),
            updated=ts,
        )
    elif op == "accept":
        a = p["acceptance"]
        entries[entry.id] = replace(
            entry,
            status=Status.RESIDUAL_ACCEPTED,
            acceptance=AcceptanceRecord(a["owner"], a["rationale"], a["timestamp"]),
            updated=ts,
        )
    elif op == "close":
        entries[entry.id] = replace(entry, status=Status.CLOSED, updated=ts)
    else:
        raise HazardLogFormatError(f"unknown journal op {op!r}")


def replay(journal: list) -> dict:
    """Rebuild the entry map from journal events, oldest first."""
    entries: dict = {}
    for event in journal:
        _apply_event(entries, event)
    return entries


# --------------------------------------------------------------------------
# Store
# --------------------------------------------------------------------------


@dataclass
class LogStore:
    """Entries + journal, optionally bound to a file path.

    ``revision`` counts journal events; it is also the on-disk revision the
    store was last loaded from or saved at.
    """

    path: Optional[Path] = None
    entries: dict = field(default_factory=dict)
    journal: list = field(default_factory=list)
    revision: int = 0

    @classmethod
    def open(cls, path: Union[str, Path]) -> "LogStore":
        """Load ``path``, or start an empty store there if it does not exist."""
        path = Path(path)
        if not path.exists():
            return cls(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise HazardLogFormatError(f"{path}: not valid JSON: {exc}") from None
        store = cls.from_dict(doc)
        store.path = path
        return store

    @classmethod
    def from_dict(cls, doc: dict) -> "LogStore":
        if not isinstance(doc, dict) or doc.get("version") != SCHEMA_VERSION:
            got = doc.get("version") if isinstance(doc, dict) else None
            raise HazardLogFormatError(f"hazard log version must be {SCHEMA_VERSION!r}, got {got!r}")
        try:
            entries = {e["id"]: HazardLogEntry.from_dict(e) for e in doc.get("entries", [])}
            journal = list(doc.get("journal", []))
            revision = int(doc.get("revision", len(journal)))
        except (KeyError, TypeError, ValueError) as exc:
            raise HazardLogFormatError(f"invalid hazard log: {exc}") from None
        return cls(None, entries, journal, revision)

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "revision": self.revision,
            "entries": [self.entries[k].to_dict() for k in sorted(self.entries)],
            "journal": self.journal,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def get(self, entry_id: str) -> HazardLogEntry:
        try:
            return self.entries[entry_id]
        except KeyError:
            raise UnknownEntry(f"no hazard log entry {entry_id!r}") from None

    def _disk_revision(self) -> int:
        if self.path is None or not self.path.exists():
            return 0
        try:
            return int(json.loads(self.path.read_text(encoding="utf-8")).get("revision", 0))
        except (ValueError, AttributeError):
            raise HazardLogFormatError(f"{self.path}: unreadable hazard log") from None

    def _commit(self, op: str, payload: dict, timestamp: str) -> None:
        event = {"revision": self.revision + 1, "timestamp": timestamp, "op": op, "payload": payload}
        entries = dict(self.entries)
        _apply_event(entries, event)
        if self.path is not None:
            if self._disk_revision() != self.revision:
                raise StaleWrite(f"{self.path} changed since it was loaded (revision {self.revision})")
            staged = LogStore(None, entries, self.journal + [event], self.revision + 1)
            _atomic_write(self.path, staged.dumps())
        self.entries = entries
        self.journal.append(event)
        self.revision += 1


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def _next_id(store: LogStore) -> str:
    n = len(store.entries) + 1
    while f"H{n}" in store.entries:
        n += 1
    return f"H{n}"


def open_entry(
    store: LogStore,
    hazard: str,
    goal: Optional[str] = None,
    *,
    case: Optional[ArgumentGraph] = None,
    initial: Optional[RiskRecord] = None,
    entry_id: Optional[str] = None,
    now: Optional[datetime] = None,
) -> HazardLogEntry:
    """Record a newly identified hazard with status Open.

    ``goal`` is checked against ``case`` when one is given. ``initial`` is
    an optional first risk estimate.
    """
    if not hazard or not hazard.strip():
        raise ValueError("hazard description must be non-empty")
    entry_id = entry_id or _next_id(store)
    if entry_id in store.entries:
        raise DuplicateHazardId(f"hazard log entry {entry_id!r} already exists")
    if goal is not None and case is not None:
        node = case.nodes.get(goal)
        if node is None or node.kind is not NodeKind.GOAL:
            raise UnknownGoal(f"{goal!r} is not a goal in the linked case")
    ts = _now(now)
    entry = HazardLogEntry(
        entry_id, hazard, goal, Status.OPEN,
        risk_history=(initial,) if initial is not None else (),
        created=ts, updated=ts,
    )
    store._commit("open", {"entry": entry.to_dict()}, ts)
    return store.get(entry_id)


def record_measure(
    store: LogStore,
    entry_id: str,
    measure: RiskReductionMeasure,
    resulting: RiskRecord,
    *,
    now: Optional[datetime] = None,
) -> HazardLogEntry:
    entry = store.get(entry_id)
    _transition(entry, Status.UNDER_MITIGATION)
    if (measure.kind is MeasureKind.ELIMINATE) != resulting.eliminated:
        raise ValueError(f"{measure.id}: an eliminate measure must (and only it may) yield an eliminated record")
    ts = _now(now)
    store._commit(
        "measure",
        {"entry": entry_id, "measure": measure.to_dict(), "resulting": resulting.to_dict()},
        ts,
    )
    return store.get(entry_id)


def accept_residual(
    store: LogStore,
    entry_id: str,
    owner: str,
    rationale: str,
    *,
    case: ArgumentGraph,
    now: Optional[datetime] = None,
) -> HazardLogEntry:
    """Risk-owner sign-off on the residual risk of a mitigated hazard.

    Raises:
        IllegalTransition: entry is not UnderMitigation.
        NothingToAccept: latest risk is already broadly acceptable.
        WrongOwner: ``owner`` is not the case's risk owner.
    """
    entry = store.get(entry_id)
    _transition(entry, Status.RESIDUAL_ACCEPTED)
    latest = entry.latest
    if latest is None or latest.eliminated or latest.zone is RiskZone.BROADLY_ACCEPTABLE:
        raise NothingToAccept(f"{entry_id} has no residual risk needing acceptance; close it instead")
    expected = case.metadata.risk_owner
    if not expected or owner != expected:
        raise WrongOwner(f"{owner!r} is not the risk owner of this case ({expected!r})")
    ts = _now(now)
    AcceptanceRecord(owner, rationale, ts)  # validates before anything is written
    store._commit(
        "accept",
        {"entry": entry_id, "acceptance": {"owner": owner, "rationale": rationale, "timestamp": ts}},
        ts,
    )
    return store.get(entry_id)


def close_entry(store: LogStore, entry_id: str, *, now: Optional[datetime] = None) -> HazardLogEntry:
    entry = store.get(entry_id)
    _transition(entry, Status.CLOSED)
    latest = entry.latest
    ok = (
        entry.status is Status.RESIDUAL_ACCEPTED
        or entry.eliminated
        or (latest is not None and latest.zone is RiskZone.BROADLY_ACCEPTABLE)
    )
    if not ok:
        raise IllegalTransition(entry.status, "zone not acceptable, no acceptance")
    ts = _now(now)
    store._commit("close", {"entry": entry_id}, ts)
    return store.get(entry_id)


# --------------------------------------------------------------------------
# Reporting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LogReport:
    counts: dict
    open_unacceptable: tuple
    unlinked: tuple
    accepted: tuple
    unlogged_goals: Optional[tuple] = None
    dangling_links: Optional[tuple] = None

    def to_dict(self) -> dict:
        out = {
            "counts": {s.value: self.counts[s] for s in Status},
            "open_unacceptable": list(self.open_unacceptable),
            "unlinked": list(self.unlinked),
            "accepted": [dict(a) for a in self.accepted],
        }
        if self.unlogged_goals is not None:
            out["case"] = {
                "unlogged_goals": list(self.unlogged_goals),
                "dangling_links": list(self.dangling_links),
            }
        return out

    def render(self) -> str:
        lines = ["status counts:"]
        lines += [f"  {s.value}: {self.counts[s]}" for s in Status]
        lines.append("open unacceptable hazards: " + (", ".join(self.open_unacceptable) or "none"))
        lines.append("hazards without a goal link: " + (", ".join(self.unlinked) or "none"))
        for a in self.accepted:
            lines.append(f"accepted {a['entry']}: owner={a['owner']} at {a['timestamp']}: {a['rationale']}")
        if self.unlogged_goals is not None:
            for g in self.unlogged_goals:
                lines.append(f"hazardous-event goal {g} lacks a log entry")
            for eid, g in self.dangling_links:
                lines.append(f"entry {eid} links to {g}, which is not a hazardous-event goal of the case")
        return "\n".join(lines) + "\n"


def report(store: LogStore, case: Optional[ArgumentGraph] = None) -> LogReport:
    entries = [store.entries[k] for k in sorted(store.entries)]
    counts = {s: 0 for s in Status}
    for e in entries:
        counts[e.status] += 1
    open_unacc = tuple(
        e.id for e in entries
        if e.status in (Status.OPEN, Status.UNDER_MITIGATION)
        and e.latest is not None and e.latest.zone is RiskZone.UNACCEPTABLE
    )
    unlinked = tuple(e.id for e in entries if e.hazardous_event_goal is None)
    accepted = tuple(
        {"entry": e.id, "owner": e.acceptance.owner, "rationale": e.acceptance.rationale,
         "timestamp": e.acceptance.timestamp}
        for e in entries if e.acceptance is not None
    )
    unlogged = dangling = None
    if case is not None:
        hazardous = case.metadata.hazardous_event_goals
        linked = {e.hazardous_event_goal for e in entries}
        order = {nid: i for i, nid in enumerate(case.nodes)}
        unlogged = tuple(sorted(hazardous - linked, key=order.__getitem__))
        dangling = tuple(
            (e.id, e.hazardous_event_goal) for e in entries
            if e.hazardous_event_goal is not None and e.hazardous_event_goal not in hazardous
        )
    return LogReport(counts, open_unacc, unlinked, accepted, unlogged, dangling)
