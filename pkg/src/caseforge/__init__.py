"""Author, validate and maintain structured safety cases.

Typical use::

    from caseforge import parse, check_case
    graph = parse(open("case.gsn").read())
    result = check_case(graph, date.today())
"""

from importlib import resources

from .argument import (
    ALL_PHASES,
    ArgumentEdge,
    ArgumentGraph,
    ArgumentNode,
    CaseError,
    CaseMetadata,
    ConfidenceAssertion,
    ConfidenceLevel,
    DanglingEdge,
    DuplicateEdge,
    DuplicateId,
    EdgeKind,
    EvidenceRef,
    Flag,
    LifecyclePhase,
    NodeKind,
    NotAGoal,
    SelfLoop,
    SourceSpan,
    UnknownNode,
    build_graph,
    developmental_frontier,
    root_goals,
    supported_closure,
)
from .canonical import CaseFormatError, load_canonical, read_case, serialize_canonical
from .dsl import CaseParseError, ParseError, format_source, parse, parse_source, render_dsl
from .render import RenderOptions, render, render_dot, render_markdown
from .risk import (
    LikelihoodBands,
    LikelihoodLevel,
    MeasureKind,
    Outcome,
    RiskConfig,
    RiskMatrix,
    RiskRecord,
    RiskReductionMeasure,
    RiskZone,
    SeverityLevel,
    WorkflowTrace,
    apply_measures,
    classify,
    load_config,
    map_probability,
    map_target_level,
    run_workflow,
)
from .validator import (
    CoverageReport,
    Diagnostic,
    ImpactReport,
    Severity,
    check_case,
    check_lifecycle_coverage,
    check_structure,
    lint,
    trace_evidence,
    what_if_remove,
)

__version__ = "0.1.0"


def corpus_text() -> str:
    """Source of the bundled two-hazard frontier AI case."""
    return resources.files(__name__).joinpath("data/frontier_case.gsn").read_text(encoding="utf-8")


def load_corpus() -> ArgumentGraph:
    return parse(corpus_text())
