import random
from datetime import date
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caseforge import load_corpus
from caseforge.argument import (
    ALL_PHASES,
    ArgumentEdge,
    ArgumentNode,
    CaseMetadata,
    EdgeKind,
    EvidenceRef,
    Flag,
    LifecyclePhase,
    NodeKind,
    NotAGoal,
    UnknownNode,
    build_graph,
    supported_closure,
)
from caseforge.dsl import parse
from caseforge.validator import (
    RULES,
    CannotRemoveRoot,
    PreconditionFailed,
    Severity,
    check_case,
    check_lifecycle_coverage,
    check_structure,
    lint,
    support_cycles,
    trace_evidence,
    what_if_remove,
)

from casegen import (
    drop_nodes,
    leg,
    oracle_closure,
    oracle_cycle_classes,
    oracle_distances,
    oracle_missing,
    oracle_phases,
    random_case,
)

FIXTURES = Path(__file__).parent / "fixtures"
TODAY = date(2026, 1, 1)
DEV, DEP, POST = ALL_PHASES
SB, CTX = EdgeKind.SUPPORTED_BY, EdgeKind.IN_CONTEXT_OF


def codes(diags):
    return [d.code for d in diags]


def case(text):
    return parse(text)


class TestStructure:
    def test_corpus_has_no_errors(self):
        diags = check_structure(load_corpus())
        assert [d for d in diags if d.severity is Severity.ERROR] == []
        assert diags == []

    def test_two_goal_cycle(self):
        graph = case('goal G0 "r"\ngoal G1 "a"\ngoal G2 "b"\nG0 <- G1\nG1 <- G2\nG2 <- G1\n')
        (r02,) = [d for d in check_structure(graph) if d.code == "R02"]
        assert set(r02.nodes) == {"G1", "G2"}

    def test_no_root(self):
        graph = case('goal G1 "a"\ngoal G2 "b"\nG1 <- G2\nG2 <- G1\n')
        assert "R01" in codes(check_structure(graph))

    def test_two_roots(self):
        graph = case('goal G1 "a" { undeveloped }\ngoal G2 "b" { undeveloped }\n')
        (r01,) = [d for d in check_structure(graph) if d.code == "R01"]
        assert r01.nodes == ("G1", "G2")

    def test_empty_graph_passes(self):
        assert check_structure(case("")) == []

    def test_solution_supporting_goal(self):
        graph = case('goal G1 "a"\nsolution Sn1 "e" { evidence: "x" }\ngoal G2 "b" { undeveloped }\n'
                     "G1 <- Sn1\nSn1 <- G2\n")
        assert "R04" in codes(check_structure(graph))
        assert "R03" not in codes(check_structure(graph))

    def test_illegal_kinds(self):
        graph = case('goal G1 "a"\nstrategy S1 "s"\nsolution Sn1 "e" { evidence: "x" }\ngoal G2 "b"\n'
                     "G1 <- S1\nS1 <- G2\nS1 <- Sn1\nG2 <- Sn1\nS1 <-ctx G2\n")
        r03 = [d for d in check_structure(graph) if d.code == "R03"]
        assert {d.nodes for d in r03} == {("S1", "Sn1"), ("S1", "G2")}

    def test_context_on_support_edge(self):
        graph = case('goal G1 "a"\ncontext C1 "c"\nG1 <- C1\n')
        assert "R07" in codes(check_structure(graph))

    def test_leaf_goal_and_bare_strategy(self):
        graph = case('goal G1 "a"\nstrategy S1 "s"\nstrategy S2 "t" { undeveloped }\nG1 <- S1\nG1 <- S2\n')
        diags = check_structure(graph)
        assert codes(diags) == ["R06"]
        assert "R05" in codes(check_structure(case('goal G1 "a"\n')))

    def test_placeholder(self):
        graph = case('goal G1 "System is safe" { uninstantiated, undeveloped }\n')
        assert codes(check_structure(graph)) == ["R08"]
        ok = case('goal G1 "System {X} is safe" { uninstantiated, undeveloped }\n')
        assert check_structure(ok) == []

    def test_unreachable_and_missing_evidence(self):
        graph = case('goal G1 "a"\nsolution Sn1 "e"\nstrategy S1 "s" { undeveloped }\nG1 <- Sn1\n')
        diags = check_structure(graph)
        assert codes(diags) == ["R09", "R10"]
        assert all(d.severity is Severity.WARNING for d in diags)

    def test_sorted_by_severity_code_node(self):
        graph = random_case(random.Random(3), illegal=True, cyclic=True)
        diags = check_structure(graph)
        keys = [(d.severity.rank, d.code, d.nodes[0] if d.nodes else "") for d in diags]
        assert keys == sorted(keys)

    @settings(max_examples=40, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_idempotent_and_nodes_resolve(self, rng):
        graph = random_case(rng, 30, illegal=True, cyclic=rng.random() < 0.5)
        first = check_structure(graph) + lint(graph, TODAY)
        assert first == check_structure(graph) + lint(graph, TODAY)
        for d in first:
            assert d.code in RULES
            assert all(n in graph.nodes for n in d.nodes)


class TestLint:
    def test_cyberattack_claim(self):
        graph = parse((FIXTURES / "cyberattack_claim.gsn").read_text())
        assert len(graph.nodes) == 5
        l01 = [d for d in lint(graph, TODAY) if d.code == "L01"]
        assert [d.nodes[0] for d in l01] == ["G2"]

    def test_strategy_silences_l01(self):
        graph = parse((FIXTURES / "cyberattack_argued.gsn").read_text())
        assert "L01" not in codes(lint(graph, TODAY))
        assert check_structure(graph) == []

    def test_shallow_goal_without_hazard(self):
        graph = case('goal G1 "a"\nsolution Sn1 "e" { evidence: "x" }\nG1 <- Sn1\n')
        assert "L01" in codes(lint(graph, TODAY))
        assert "L01" not in codes(lint(graph, TODAY, max_depth=-1))

    def test_deep_goal_is_fine(self):
        graph = load_corpus()
        assert "L01" not in codes(lint(graph, TODAY))

    def test_expired_evidence(self):
        graph = case('goal G1 "a"\nsolution Sn1 "e" { evidence: "x" dated: 2024-01-01 valid-days: 30 }\nG1 <- Sn1\n')
        assert "L02" in codes(lint(graph, date(2025, 1, 1)))
        # last valid day is dated + valid_for_days
        assert "L02" not in codes(lint(graph, date(2024, 1, 31)))
        assert "L02" in codes(lint(graph, date(2024, 2, 1)))

    def test_undated_evidence_never_stale(self):
        graph = case('goal G1 "a"\nsolution Sn1 "e" { evidence: "x" }\nG1 <- Sn1\n')
        assert "L02" not in codes(lint(graph, date(2999, 1, 1)))

    def test_detached_context_and_rootless_terms(self):
        graph = case('goal G1 "a" { undeveloped }\ncontext C1 "c"\nassumption A1 "a"\n')
        diags = lint(graph, TODAY)
        assert [(d.code, d.nodes) for d in diags] == [("L04", ("G1",)), ("L03", ("A1",)), ("L03", ("C1",))]
        assert diags[-1].severity is Severity.INFO

    def test_assumption_does_not_define_terms(self):
        graph = case('goal G1 "a" { undeveloped }\nassumption A1 "a"\nG1 <-ctx A1\n')
        assert codes(lint(graph, TODAY)) == ["L04"]

    def test_corpus_clean(self):
        assert lint(load_corpus(), TODAY) == []

    def test_disable(self):
        graph = case('goal G1 "a" { undeveloped }\ncontext C1 "c"\n')
        assert codes(lint(graph, TODAY, disabled={"L03", "L04"})) == []

    @settings(max_examples=60, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_l01_never_fires_through_a_strategy(self, rng):
        graph = random_case(rng, 30, illegal=True)
        for d in lint(graph, TODAY, max_depth=50):
            if d.code == "L01":
                kids = graph.supporters(d.nodes[0])
                assert all(graph.nodes[k].kind not in (NodeKind.STRATEGY, NodeKind.GOAL) for k in kids)


class TestCoverage:
    def test_corpus_fully_covered(self):
        report = check_lifecycle_coverage(load_corpus())
        assert report.missing == frozenset()
        assert report.diagnostics == ()
        assert set(report.buckets) == {"G2", "G3"}
        assert report.buckets["G3"][POST] == ("S7", "G15")

    def test_untagged_goals_inherit(self):
        report = check_lifecycle_coverage(load_corpus())
        assert report.buckets["G2"][DEV] == ("S2", "G4", "G5")

    @pytest.mark.parametrize("hazard,strategy", [("G2", "S4"), ("G3", "S7")])
    def test_missing_post_deployment_leg(self, hazard, strategy):
        graph = drop_nodes(load_corpus(), leg(load_corpus(), strategy))
        report = check_lifecycle_coverage(graph)
        assert report.missing == {(hazard, POST)}
        assert [(d.code, d.nodes) for d in report.diagnostics] == [("COV01", (hazard,))]

    def test_no_hazardous_goals(self):
        report = check_lifecycle_coverage(case('goal G1 "a" { undeveloped }\n'))
        assert report.buckets == {} and report.missing == frozenset() and report.diagnostics == ()

    def test_undeveloped_only_phase(self):
        graph = case(
            'goal G1 "a" { hazardous-event }\n'
            'strategy S1 "d" { lifecycle: development, undeveloped }\n'
            'strategy S2 "e" { lifecycle: deployment, undeveloped }\n'
            'strategy S3 "f" { lifecycle: post-deployment }\n'
            'goal G2 "g" { undeveloped }\n'
            "G1 <- S1\nG1 <- S2\nG1 <- S3\nS3 <- G2\n"
        )
        report = check_lifecycle_coverage(graph)
        assert report.missing == frozenset()
        cov02 = [d for d in report.diagnostics if d.code == "COV02"]
        assert [d.nodes for d in cov02] == [("G1", "S1"), ("G1", "S2")]

    def test_phase_override(self):
        graph = drop_nodes(load_corpus(), leg(load_corpus(), "S7"))
        assert check_lifecycle_coverage(graph, (DEV, DEP)).missing == frozenset()

    def test_preconditions(self):
        with pytest.raises(PreconditionFailed):
            check_lifecycle_coverage(case('goal G1 "a" { undeveloped }\ngoal G2 "b" { undeveloped }\n'))
        with pytest.raises(PreconditionFailed):
            check_lifecycle_coverage(case('goal G0 "r"\ngoal G1 "a"\ngoal G2 "b"\nG0 <- G1\nG1 <- G2\nG2 <- G1\n'))

    def test_missing_is_exactly_empty_buckets(self):
        rng = random.Random(11)
        for _ in range(50):
            graph = random_case(rng, 30, orphans=0)
            report = check_lifecycle_coverage(graph)
            empty = {(g, p) for g, per in report.buckets.items() for p, ids in per.items() if not ids}
            assert report.missing == empty

    @settings(max_examples=60, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_inheritance_matches_path_oracle(self, rng):
        graph = random_case(rng, 40, orphans=0)
        report = check_lifecycle_coverage(graph)
        for g, per in report.buckets.items():
            phases = oracle_phases(graph, g)
            for p in ALL_PHASES:
                assert set(per[p]) == {n for n, ps in phases.items() if p in ps}
        assert report.missing == oracle_missing(graph)


class TestTrace:
    def test_cbrn_includes_deliberative_alignment(self):
        traces = trace_evidence(load_corpus(), "G3")
        uris = {t.evidence.uri_or_path for t in traces}
        assert "cite:guan_2024_deliberative" in uris
        sn9 = next(t for t in traces if t.solution == "Sn9")
        assert sn9.path == ("G3", "S6", "G12", "Sn9")

    def test_sorted_by_solution_id(self):
        ids = [t.solution for t in trace_evidence(load_corpus(), "G1")]
        assert ids == sorted(ids) and len(ids) == 12

    def test_no_solutions(self):
        assert trace_evidence(case('goal G1 "a"\n'), "G1") == []

    def test_errors(self):
        graph = case('goal G1 "a"\ncontext C1 "c"\n')
        with pytest.raises(UnknownNode):
            trace_evidence(graph, "X")
        with pytest.raises(NotAGoal):
            trace_evidence(graph, "C1")


class TestWhatIf:
    def test_remove_sole_solution(self):
        report = what_if_remove(load_corpus(), "Sn1")
        assert report.newly_undeveloped == ("G4",)
        assert report.newly_uncovered == () and report.orphaned == ()

    def test_remove_detached_context_is_inert(self):
        graph = case('goal G1 "a" { undeveloped }\ncontext C1 "c"\n')
        assert what_if_remove(graph, "C1").empty

    def test_remove_only_deployment_strategy(self):
        report = what_if_remove(load_corpus(), "S3")
        assert report.newly_uncovered == (("G2", DEP),)
        assert report.orphaned == ("G6", "G7", "Sn3", "Sn4")

    def test_original_untouched(self):
        graph = load_corpus()
        before = len(graph.nodes)
        what_if_remove(graph, "S3")
        assert len(graph.nodes) == before and "S3" in graph.nodes

    def test_errors(self):
        graph = load_corpus()
        with pytest.raises(UnknownNode):
            what_if_remove(graph, "nope")
        with pytest.raises(CannotRemoveRoot):
            what_if_remove(graph, "G1")

    @settings(max_examples=40, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_matches_revalidation(self, rng):
        graph = random_case(rng, 30)
        ids = list(graph.nodes)[1:]
        if not ids:
            return
        nid = rng.choice(ids)
        report = what_if_remove(graph, nid)
        after = drop_nodes(graph, {nid})
        r05 = lambda g: {d.nodes[0] for d in check_structure(g) if d.code == "R05"}
        assert set(report.newly_undeveloped) == r05(after) - r05(graph)
        assert set(report.newly_uncovered) == oracle_missing(after) - oracle_missing(graph)


class TestOracles:
    @settings(max_examples=60, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_cycles(self, rng):
        graph = random_case(rng, 30, cyclic=rng.random() < 0.6, illegal=True)
        found = {frozenset(c) for c in support_cycles(graph)}
        assert found == oracle_cycle_classes(graph)
        assert ("R02" in codes(check_structure(graph))) == bool(found)

    @settings(max_examples=60, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_trace_shortest_paths(self, rng):
        graph = random_case(rng, 40, illegal=True)
        for g in graph.of_kind(NodeKind.GOAL):
            dist = oracle_distances(graph, g.id)
            traces = trace_evidence(graph, g.id)
            expected = {n for n in oracle_closure(graph, g.id) if graph.nodes[n].kind is NodeKind.SOLUTION}
            assert {t.solution for t in traces} == expected
            for t in traces:
                assert t.path[0] == g.id and t.path[-1] == t.solution
                assert len(t.path) - 1 == dist[t.solution]
                for a, b in zip(t.path, t.path[1:]):
                    assert b in graph.supporters(a)


class TestCheckCase:
    def test_corpus_passes(self):
        result = check_case(load_corpus(), TODAY)
        assert result.passed and result.diagnostics == ()

    def test_coverage_failure_fails(self):
        graph = drop_nodes(load_corpus(), leg(load_corpus(), "S7"))
        result = check_case(graph, TODAY)
        assert not result.passed
        assert codes(result.diagnostics) == ["COV01"]

    def test_precondition_failure_fails(self):
        result = check_case(case('goal G1 "a" { undeveloped }\ngoal G2 "b" { undeveloped }\n'), TODAY)
        assert result.coverage is None and not result.passed

    def test_disabled_structure_rule(self):
        graph = case('goal G1 "a"\nsolution Sn1 "e"\nG1 <- Sn1\ncontext C1 "c"\nG1 <-ctx C1\n')
        assert "R10" in codes(check_case(graph, TODAY).diagnostics)
        assert "R10" not in codes(check_case(graph, TODAY, disabled={"R10"}).diagnostics)
