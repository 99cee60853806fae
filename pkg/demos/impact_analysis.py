"""Library tour: trace evidence, probe what-if removals, replay a mitigation.

Run with ``python demos/impact_analysis.py`` after installing the package.
"""

from datetime import date
from pathlib import Path

from caseforge import (
    LifecyclePhase,
    MeasureKind,
    RiskRecord,
    RiskReductionMeasure,
    check_case,
    parse,
    run_workflow,
    trace_evidence,
    what_if_remove,
)

HERE = Path(__file__).resolve().parent


def main() -> None:
    graph = parse((HERE / "frontier_case.gsn").read_text(encoding="utf-8"))
    result = check_case(graph, date(2026, 10, 14))
    print(f"{len(graph.nodes)} nodes, {len(result.diagnostics)} findings, "
          f"missing coverage: {sorted(result.coverage.missing) or 'none'}")

    print("\nevidence behind G3:")
    for t in trace_evidence(graph, "G3"):
        ref = t.evidence.uri_or_path if t.evidence else "-"
        print(f"  {t.solution:5} {ref:40} via {' > '.join(t.path)}")

    # Dropping each strategy in turn shows which legs carry lifecycle coverage.
    print("\nwhat if a strategy is withdrawn?")
    for sid in sorted(n for n in graph.nodes if n.startswith("S") and not n.startswith("Sn")):
        impact = what_if_remove(graph, sid)
        uncovered = ", ".join(f"{g}/{p.value}" for g, p in impact.newly_uncovered) or "-"
        print(f"  {sid:3} uncovered {uncovered:28} orphaned {len(impact.orphaned)}")

    print("\nscheming hazard, two stacked measures:")
    measures = [
        RiskReductionMeasure("M-DA1", MeasureKind.MODIFY_DESIGN_OR_OPERATION,
                             LifecyclePhase.DEVELOPMENT, likelihood_factor=12),
        RiskReductionMeasure("M-DA2", MeasureKind.MODIFY_DESIGN_OR_OPERATION,
                             LifecyclePhase.POST_DEPLOYMENT, likelihood_factor=20),
    ]
    trace = run_workflow("deceptive alignment", RiskRecord.from_probability(0.12, "catastrophic"), measures)
    for i, step in enumerate(trace.steps, 1):
        record = getattr(step, "record", None)
        detail = f"{record.likelihood.label}/{record.severity.label} p={record.probability:.4g}" if record else ""
        print(f"  {i:2}. {type(step).__name__:15} {detail}")
    print(f"  outcome: {trace.outcome.value}")


if __name__ == "__main__":
    main()
