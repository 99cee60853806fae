import json
import os
import random
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caseforge import hazardlog as hl
from caseforge import load_corpus
from caseforge.argument import LifecyclePhase
from caseforge.hazardlog import (
    DuplicateHazardId,
    HazardLogFormatError,
    IllegalTransition,
    LogStore,
    NothingToAccept,
    StaleWrite,
    Status,
    UnknownEntry,
    UnknownGoal,
    WrongOwner,
    accept_residual,
    close_entry,
    open_entry,
    record_measure,
    replay,
    report,
)
from caseforge.risk import (
    LikelihoodLevel as L,
    MeasureKind,
    RiskRecord,
    RiskReductionMeasure,
    RiskZone,
    SeverityLevel as S,
    apply_measure,
)

from casegen import random_log_ops

CASE = load_corpus()
OWNER = CASE.metadata.risk_owner
T0 = datetime(2025, 3, 1, 12, 0, tzinfo=timezone.utc)
DEV, DEP = LifecyclePhase.DEVELOPMENT, LifecyclePhase.DEPLOYMENT
RLHF = RiskReductionMeasure("M-CB1", MeasureKind.MODIFY_DESIGN_OR_OPERATION, DEV, likelihood_step=1, description="RLHF")
DELIB = RiskReductionMeasure("M-DA1", MeasureKind.MODIFY_DESIGN_OR_OPERATION, DEP, likelihood_factor=12)
ELIM = RiskReductionMeasure("M-X", MeasureKind.ELIMINATE, DEV)


def scheming(store):
    initial = RiskRecord.from_probability(0.12, S.CATASTROPHIC)
    entry = open_entry(store, "Deceptive Alignment", "G2", case=CASE, initial=initial, now=T0)
    record_measure(store, entry.id, DELIB, apply_measure(initial, DELIB), now=T0)
    return entry.id


@pytest.fixture
def store(tmp_path):
    return LogStore.open(tmp_path / "log.hazlog.json")


class TestOpen:
    def test_linked_entry(self, store):
        entry = open_entry(store, "Deceptive Alignment", "G2", case=CASE, now=T0)
        assert (entry.id, entry.status, entry.hazardous_event_goal) == ("H1", Status.OPEN, "G2")
        assert entry.created == entry.updated == "2025-03-01T12:00:00Z"

    def test_unlinked_entry(self, store):
        entry = open_entry(store, "sycophancy amplifying bias", now=T0)
        assert entry.hazardous_event_goal is None and entry.status is Status.OPEN

    def test_empty_hazard(self, store):
        with pytest.raises(ValueError):
            open_entry(store, "  ")

    def test_unknown_goal(self, store):
        with pytest.raises(UnknownGoal):
            open_entry(store, "x", "G99", case=CASE)
        with pytest.raises(UnknownGoal):
            open_entry(store, "x", "Sn1", case=CASE)

    def test_duplicate_id(self, store):
        open_entry(store, "a", entry_id="H7")
        with pytest.raises(DuplicateHazardId):
            open_entry(store, "b", entry_id="H7")

    def test_generated_ids_are_unique(self, store):
        open_entry(store, "a", entry_id="H2")
        assert [open_entry(store, "b").id, open_entry(store, "c").id] == ["H3", "H4"]

    def test_naive_time_is_utc(self, store):
        entry = open_entry(store, "a", now=datetime(2025, 1, 1, 9, 30))
        assert entry.created == "2025-01-01T09:30:00Z"


class TestMeasure:
    def test_cbrn_rlhf(self, store):
        eid = open_entry(store, "CBRN capabilities", "G3", case=CASE).id
        entry = record_measure(store, eid, RLHF, RiskRecord.assess(L.POSSIBLE, S.CATASTROPHIC))
        assert entry.status is Status.UNDER_MITIGATION and len(entry.risk_history) == 1

    def test_history_order(self, store):
        eid = open_entry(store, "CBRN capabilities", "G3", case=CASE).id
        first = RiskRecord.assess(L.POSSIBLE, S.CATASTROPHIC)
        second = RiskRecord.assess(L.UNLIKELY, S.CATASTROPHIC)
        record_measure(store, eid, RLHF, first)
        entry = record_measure(store, eid, DELIB, second)
        assert entry.risk_history == (first, second) and entry.measures == ("M-CB1", "M-DA1")

    def test_closed_is_terminal(self, store):
        eid = open_entry(store, "x", initial=RiskRecord.assess(L.RARE, S.NEGLIGIBLE)).id
        close_entry(store, eid)
        with pytest.raises(IllegalTransition) as exc:
            record_measure(store, eid, RLHF, RiskRecord.assess(L.RARE, S.MINOR))
        assert exc.value.status is Status.CLOSED

    def test_unknown_entry(self, store):
        with pytest.raises(UnknownEntry):
            record_measure(store, "H1", RLHF, RiskRecord.assess(L.RARE, S.MINOR))

    def test_eliminate_record_must_agree(self, store):
        eid = open_entry(store, "x").id
        with pytest.raises(ValueError):
            record_measure(store, eid, ELIM, RiskRecord.assess(L.RARE, S.MINOR))
        with pytest.raises(ValueError):
            record_measure(store, eid, RLHF, RiskRecord.eliminated_marker(S.MINOR))


class TestAcceptAndClose:
    def test_scheming_accepted_then_closed(self, store):
        eid = scheming(store)
        assert store.get(eid).latest.zone is RiskZone.TOLERABLE_ALARP
        rationale = "remaining scheming risk is within the developer's residual risk appetite"
        entry = accept_residual(store, eid, OWNER, rationale, case=CASE, now=T0)
        assert entry.status is Status.RESIDUAL_ACCEPTED
        assert (entry.acceptance.owner, entry.acceptance.rationale) == (OWNER, rationale)
        assert close_entry(store, eid).status is Status.CLOSED

    def test_wrong_owner(self, store):
        eid = scheming(store)
        with pytest.raises(WrongOwner):
            accept_residual(store, eid, "An Intern", "fine", case=CASE)

    def test_nothing_to_accept(self, store):
        eid = open_entry(store, "x").id
        record_measure(store, eid, RLHF, RiskRecord.assess(L.RARE, S.MINOR))
        with pytest.raises(NothingToAccept):
            accept_residual(store, eid, OWNER, "r", case=CASE)

    def test_accept_needs_mitigation_first(self, store):
        eid = open_entry(store, "x", initial=RiskRecord.assess(L.LIKELY, S.MAJOR)).id
        with pytest.raises(IllegalTransition):
            accept_residual(store, eid, OWNER, "r", case=CASE)

    def test_empty_rationale(self, store):
        eid = scheming(store)
        with pytest.raises(ValueError):
            accept_residual(store, eid, OWNER, " ", case=CASE)
        assert store.get(eid).status is Status.UNDER_MITIGATION

    def test_close_unacceptable(self, store):
        eid = open_entry(store, "x").id
        record_measure(store, eid, RLHF, RiskRecord.assess(L.LIKELY, S.CATASTROPHIC))
        with pytest.raises(IllegalTransition, match="zone not acceptable, no acceptance"):
            close_entry(store, eid)

    def test_close_after_elimination(self, store):
        eid = open_entry(store, "x", initial=RiskRecord.assess(L.LIKELY, S.MAJOR)).id
        record_measure(store, eid, ELIM, RiskRecord.eliminated_marker(S.MAJOR))
        assert close_entry(store, eid).status is Status.CLOSED

    def test_open_broadly_acceptable_closes_directly(self, store):
        eid = open_entry(store, "x", initial=RiskRecord.assess(L.RARE, S.MINOR)).id
        assert close_entry(store, eid).status is Status.CLOSED

    def test_open_without_estimate_cannot_close(self, store):
        eid = open_entry(store, "x").id
        with pytest.raises(IllegalTransition):
            close_entry(store, eid)


class TestReport:
    def test_empty(self):
        rep = report(LogStore())
        assert set(rep.counts.values()) == {0}
        assert rep.unlogged_goals is None and "case" not in rep.to_dict()

    def test_cross_check(self, store):
        open_entry(store, "CBRN capabilities", "G3", case=CASE)
        rep = report(store, CASE)
        assert rep.unlogged_goals == ("G2",)
        assert "hazardous-event goal G2 lacks a log entry" in rep.render()

    def test_empty_store_flags_both_goals(self):
        assert report(LogStore(), CASE).unlogged_goals == ("G2", "G3")

    def test_counts(self, store):
        eid = scheming(store)
        accept_residual(store, eid, OWNER, "accepted", case=CASE, now=T0)
        open_entry(store, "sycophancy amplifying bias")
        rep = report(store)
        assert rep.counts[Status.OPEN] == 1 and rep.counts[Status.RESIDUAL_ACCEPTED] == 1
        assert rep.unlinked == ("H2",)
        (acc,) = rep.accepted
        assert acc == {"entry": "H1", "owner": OWNER, "rationale": "accepted", "timestamp": "2025-03-01T12:00:00Z"}
        assert f"owner={OWNER}" in rep.render()

    def test_open_unacceptable_and_dangling(self, store):
        open_entry(store, "a", "G1", initial=RiskRecord.assess(L.LIKELY, S.CATASTROPHIC))
        rep = report(store, CASE)
        assert rep.open_unacceptable == ("H1",) and rep.dangling_links == (("H1", "G1"),)


class TestPersistence:
    def test_reload_equals(self, store, tmp_path):
        eid = scheming(store)
        again = LogStore.open(store.path)
        assert again.entries == store.entries and again.revision == store.revision == 2
        assert again.dumps() == store.path.read_text()
        assert json.loads(again.dumps())["version"] == "caseforge-hazlog/1"
        assert again.get(eid).risk_history[-1].probability == pytest.approx(0.01, abs=1e-12)

    def test_journal_events(self, store):
        scheming(store)
        events = json.loads(store.path.read_text())["journal"]
        assert [(e["revision"], e["op"]) for e in events] == [(1, "open"), (2, "measure")]
        assert set(events[0]) == {"revision", "timestamp", "op", "payload"}

    def test_stale_write(self, store):
        open_entry(store, "a")
        other = LogStore.open(store.path)
        open_entry(other, "b")
        with pytest.raises(StaleWrite):
            open_entry(store, "c")
        assert sorted(LogStore.open(store.path).entries) == ["H1", "H2"]

    def test_failed_rename_leaves_file_untouched(self, store, monkeypatch):
        open_entry(store, "a")
        before = store.path.read_bytes()

        def boom(*a):
            raise OSError("disk gone")

        monkeypatch.setattr(hl.os, "replace", boom)
        with pytest.raises(OSError):
            open_entry(store, "b")
        assert store.path.read_bytes() == before
        assert list(store.path.parent.iterdir()) == [store.path]
        assert sorted(store.entries) == ["H1"] and store.revision == 1

    def test_crash_mid_write_leaves_file_untouched(self, store, monkeypatch):
        open_entry(store, "a")
        before = store.path.read_bytes()

        def crash(fd):
            raise KeyboardInterrupt

        monkeypatch.setattr(hl.os, "fsync", crash)
        with pytest.raises(KeyboardInterrupt):
            open_entry(store, "b")
        assert store.path.read_bytes() == before
        assert len(os.listdir(store.path.parent)) == 1

    def test_bad_files(self, tmp_path):
        p = tmp_path / "x.hazlog.json"
        p.write_text("{")
        with pytest.raises(HazardLogFormatError):
            LogStore.open(p)
        p.write_text('{"version": "caseforge-hazlog/0"}')
        with pytest.raises(HazardLogFormatError):
            LogStore.open(p)

    def test_missing_file_is_empty_store(self, tmp_path):
        store = LogStore.open(tmp_path / "new.hazlog.json")
        assert store.entries == {} and not store.path.exists()


def audit(store):
    for e in store.entries.values():
        if e.status is Status.RESIDUAL_ACCEPTED:
            assert e.acceptance is not None
        if e.status is Status.CLOSED:
            last = e.latest
            assert e.acceptance is not None or e.eliminated or (last and last.zone is RiskZone.BROADLY_ACCEPTABLE)
        if e.acceptance is not None:
            assert e.acceptance.owner == OWNER and e.acceptance.rationale.strip()
    rebuilt = LogStore(None, replay(store.journal), list(store.journal), store.revision)
    assert rebuilt.dumps() == store.dumps()


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_random_operation_sequences(rng):
    store = LogStore()
    for op, eid, before, after, err in random_log_ops(rng, store, CASE, rng.randint(1, 30)):
        if err is not None:
            assert before == after
        elif op != "open":
            assert (before, after) in hl.LEGAL_TRANSITIONS
        audit(store)


def test_random_operation_sequences_on_disk(tmp_path):
    rng = random.Random(5)
    path = tmp_path / "seq.hazlog.json"
    store = LogStore.open(path)
    for _ in random_log_ops(rng, store, CASE, 30):
        assert LogStore.open(path).dumps() == store.dumps()
    audit(LogStore.open(path))
