"""``caseforge`` command-line front end.

Exit status: 0 pass, 1 findings of error severity (or a refused hazard-log
transition), 2 usage, I/O, schema or parse failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import hazardlog
from .argument import ALL_PHASES, CaseError, EvidenceRef, LifecyclePhase
from .canonical import CaseFormatError, read_case, serialize_canonical
from .dsl import CaseParseError, ParseError, format_source
from .render import RenderOptions, render
from .risk import (
    EvaluateRisk,
    EstimateRisk,
    IdentifyHazard,
    ApplyMeasure,
    Outcome,
    RiskConfig,
    RiskError,
    RiskRecord,
    RiskReductionMeasure,
    RiskZone,
    apply_measure,
    apply_measures,
    load_config,
    map_target_level,
    run_workflow,
    step_to_dict,
)
from .validator import RULES, Diagnostic, Severity, check_case, check_structure

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE = 0, 1, 2
MATRIX_ENV = "CASEFORGE_MATRIX"


class UsageError(Exception):
    """Bad input: reported on stderr, exit 2."""


# --------------------------------------------------------------------------
# Shared helpers
# --------------------------------------------------------------------------


def _load_case(path: str):
    try:
        return read_case(path)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: cannot read: {exc}") from None
    except CaseFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _parse_error_line(path: str, err: ParseError) -> str:
    return f"error {err.code} {path}:{err.span.line}:{err.span.column}: {err.message} []"


def _line_of(graph, diag: Diagnostic) -> int:
    """Source line of the first implicated node; 0 when it has no span."""
    if diag.nodes and diag.nodes[0] in graph.nodes:
        span = graph.nodes[diag.nodes[0]].span
        if span is not None:
            return span.line
    return 0


def diagnostic_line(path: str, graph, diag: Diagnostic) -> str:
    line = _line_of(graph, diag)
    return f"{diag.severity.value} {diag.code} {path}:{line}: {diag.message} [{', '.join(diag.nodes)}]"


def _config(args) -> RiskConfig:
    path = args.matrix or os.environ.get(MATRIX_ENV) or None
    try:
        return load_config(path)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such risk configuration file") from None
    except RiskError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from None


def _today(args) -> date:
    if args.today is None:
        return date.today()
    try:
        return date.fromisoformat(args.today)
    except ValueError:
        raise UsageError(f"--today: expected YYYY-MM-DD, got {args.today!r}") from None


def _now(args) -> Optional[datetime]:
    if args.now is None:
        return None
    try:
        when = datetime.fromisoformat(args.now.replace("Z", "+00:00"))
    except ValueError:
        raise UsageError(f"--now: expected an ISO-8601 timestamp, got {args.now!r}") from None
    return when if when.tzinfo else when.replace(tzinfo=timezone.utc)


def _codes(text: Optional[str]) -> set:
    if not text:
        return set()
    codes = {c.strip().upper() for c in text.split(",") if c.strip()}
    unknown = sorted(codes - set(RULES))
    if unknown:
        raise UsageError(f"unknown rule code(s): {', '.join(unknown)}")
    return codes


def _phases(text: Optional[str]) -> tuple:
    if text is None:
        return ALL_PHASES
    try:
        return tuple(LifecyclePhase(p.strip()) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise UsageError(f"--phases: {exc}") from None


def _emit_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False))


# --------------------------------------------------------------------------
# check / render / fmt / export
# --------------------------------------------------------------------------


def _check_one(path: str, args, disabled: set, phases: tuple, today: date):
    """Returns (exit status, json summary)."""
    try:
        graph = read_case(path)
    except CaseParseError as exc:
        for err in exc.errors:
            print(_parse_error_line(path, err), file=sys.stderr)
        return EXIT_USAGE, {"file": path, "parse_errors": [
            {"code": e.code, "line": e.span.line, "column": e.span.column, "message": e.message}
            for e in exc.errors
        ]}
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError, CaseFormatError) as exc:
        raise UsageError(f"{path}: {exc}") from None

    result = check_case(graph, today, phases=phases, max_depth=args.l01_depth, disabled=disabled)
    status = EXIT_OK
    for d in result.diagnostics:
        if args.format == "text":
            print(diagnostic_line(path, graph, d), file=sys.stderr)
        if d.severity is Severity.ERROR or (args.strict and d.severity is Severity.WARNING):
            status = EXIT_FINDINGS
    summary = {
        "file": path,
        "passed": status == EXIT_OK,
        "diagnostics": [dict(d.to_dict(), line=_line_of(graph, d))
                        for d in result.diagnostics],
        "coverage": result.coverage.to_dict() if result.coverage is not None else None,
    }
    return status, summary


def cmd_check(args) -> int:
    disabled = set(args.no_lint_codes)
    phases = _phases(args.phases)
    today = _today(args)
    if args.matrix or os.environ.get(MATRIX_ENV):
        _config(args)  # fail early on a broken matrix even though check does not classify risk
    worst, summaries = EXIT_OK, []
    for path in args.paths:
        status, summary = _check_one(path, args, disabled, phases, today)
        worst = max(worst, status)
        summaries.append(summary)
        if args.format == "text":
            verdict = {EXIT_OK: "PASS", EXIT_FINDINGS: "FAIL"}.get(status, "ERROR")
            print(f"check: {verdict} {path}")
    if args.format == "json":
        _emit_json(summaries if len(summaries) > 1 else summaries[0])
    return worst


def cmd_render(args) -> int:
    try:
        graph = read_case(args.path)
    except CaseParseError as exc:
        for err in exc.errors:
            print(_parse_error_line(args.path, err), file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError:
        raise UsageError(f"{args.path}: no such file") from None
    except (OSError, UnicodeDecodeError, CaseFormatError) as exc:
        raise UsageError(f"{args.path}: {exc}") from None
    blocking = [d for d in check_structure(graph) if d.code in ("R01", "R02")]
    if blocking:
        for d in blocking:
            print(diagnostic_line(args.path, graph, d), file=sys.stderr)
        return EXIT_FINDINGS
    highlight = {h.strip() for h in (args.highlight or "").split(",") if h.strip()}
    unknown = sorted(highlight - set(graph.nodes))
    if unknown:
        raise UsageError(f"--highlight: unknown node id(s): {', '.join(unknown)}")
    options = RenderOptions(args.to, frozenset(highlight), args.lanes)
    sys.stdout.write(render(graph, options))
    return EXIT_OK


def cmd_fmt(args) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"{args.path}: no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"{args.path}: cannot read: {exc}") from None
    try:
        out = format_source(text)
    except CaseParseError as exc:
        for err in exc.errors:
            print(_parse_error_line(args.path, err), file=sys.stderr)
        return EXIT_USAGE
    if args.check:
        if out != text.replace("\r\n", "\n"):
            print(f"fmt: {args.path} is not formatted", file=sys.stderr)
            return EXIT_FINDINGS
        return EXIT_OK
    sys.stdout.write(out)
    return EXIT_OK


def cmd_export(args) -> int:
    try:
        graph = read_case(args.path)
    except CaseParseError as exc:
        for err in exc.errors:
            print(_parse_error_line(args.path, err), file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError:
        raise UsageError(f"{args.path}: no such file") from None
    except (OSError, UnicodeDecodeError, CaseFormatError) as exc:
        raise UsageError(f"{args.path}: {exc}") from None
    sys.stdout.write(serialize_canonical(graph) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# risk
# --------------------------------------------------------------------------

_MEASURE_KEYS = {"id", "kind", "phase", "likelihood_factor", "likelihood_step", "severity_step",
                 "description", "evidence"}
_SPEC_KEYS = {"hazard", "probability", "likelihood", "severity", "measures", "note"}


def _measure_from_spec(i: int, m) -> RiskReductionMeasure:
    if not isinstance(m, dict):
        raise UsageError(f"measures[{i}] must be an object")
    extra = sorted(set(m) - _MEASURE_KEYS)
    if extra:
        raise UsageError(f"measures[{i}]: unknown field(s) {', '.join(extra)}")
    for key in ("id", "kind", "phase"):
        if key not in m:
            raise UsageError(f"measures[{i}]: missing {key!r}")
    ev = m.get("evidence")
    if ev is not None and not isinstance(ev, str):
        raise UsageError(f"measures[{i}].evidence must be a string")
    return RiskReductionMeasure(
        m["id"], m["kind"], m["phase"],
        likelihood_factor=m.get("likelihood_factor"),
        likelihood_step=m.get("likelihood_step", 0),
        severity_step=m.get("severity_step", 0),
        description=m.get("description", ""),
        evidence_ref=EvidenceRef(ev) if ev else None,
    )


def load_hazard_spec(path: str, config: RiskConfig):
    """Parse a hazard-spec file into (hazard, initial record, measures)."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: cannot read: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: hazard spec must be a JSON object")
    extra = sorted(set(doc) - _SPEC_KEYS)
    if extra:
        raise UsageError(f"{path}: unknown field(s) {', '.join(extra)}")
    hazard = doc.get("hazard")
    if not isinstance(hazard, str) or not hazard.strip():
        raise UsageError(f"{path}: 'hazard' must be a non-empty string")
    if "severity" not in doc:
        raise UsageError(f"{path}: missing 'severity'")
    if ("probability" in doc) == ("likelihood" in doc):
        raise UsageError(f"{path}: give exactly one of 'probability' or 'likelihood'")
    measures = doc.get("measures", [])
    if not isinstance(measures, list):
        raise UsageError(f"{path}: 'measures' must be a list")
    try:
        if "probability" in doc:
            initial = RiskRecord.from_probability(doc["probability"], doc["severity"], config.matrix,
                                                  config.bands, doc.get("note", "initial estimate"))
        else:
            initial = RiskRecord.assess(doc["likelihood"], doc["severity"], config.matrix,
                                        doc.get("note", "initial estimate"))
        parsed = [_measure_from_spec(i, m) for i, m in enumerate(measures)]
    except (RiskError, ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    ids = [m.id for m in parsed]
    if len(set(ids)) != len(ids):
        raise UsageError(f"{path}: measure ids must be unique")
    return hazard, initial, parsed


def format_record(r: RiskRecord) -> str:
    if r.eliminated:
        return "eliminated"
    p = "" if r.probability is None else f" p={r.probability:.6g}"
    return f"{r.likelihood.label}/{r.severity.label} -> {r.zone.label}{p}"


def _outcome_of(residual: RiskRecord) -> Outcome:
    if residual.eliminated:
        return Outcome.ELIMINATED
    if residual.zone is RiskZone.BROADLY_ACCEPTABLE:
        return Outcome.TOLERABLE
    return Outcome.RESIDUAL_REQUIRES_ACCEPTANCE


def cmd_risk_eval(args) -> int:
    config = _config(args)
    hazard, initial, measures = load_hazard_spec(args.spec, config)
    try:
        residual, trace = apply_measures(initial, measures, config.matrix, config.bands)
    except RiskError as exc:
        raise UsageError(f"{args.spec}: {exc}") from None
    outcome = _outcome_of(residual)
    target = map_target_level(initial.zone, initial.severity, config)
    if args.format == "json":
        _emit_json({
            "hazard": hazard,
            "initial": initial.to_dict(),
            "trace": [{"measure": s.measure_id, "before": s.before.to_dict(), "after": s.after.to_dict()}
                      for s in trace],
            "residual": residual.to_dict(),
            "outcome": outcome.value,
            "integrity_target": {"level": target.level, "note": target.note},
        })
    else:
        print(f"hazard: {hazard}")
        print(f"initial: {format_record(initial)}")
        for s in trace:
            print(f"  {s.measure_id}: {format_record(s.before)}  =>  {format_record(s.after)}")
        print(f"residual: {format_record(residual)}")
        print(f"outcome: {outcome.value}")
        print(f"integrity target: {target.note}")
    return EXIT_FINDINGS if args.strict and outcome is Outcome.RESIDUAL_REQUIRES_ACCEPTANCE else EXIT_OK


def _step_text(step) -> str:
    if isinstance(step, IdentifyHazard):
        return f"identify hazard: {step.hazard}"
    if isinstance(step, EstimateRisk):
        return f"estimate risk: {format_record(step.record)}"
    if isinstance(step, EvaluateRisk):
        return f"evaluate risk: {step.zone.label}"
    if isinstance(step, ApplyMeasure):
        return f"apply measure: {step.measure_id}"
    return f"terminate: {step.outcome.value}"


def cmd_risk_workflow(args) -> int:
    config = _config(args)
    hazard, initial, measures = load_hazard_spec(args.spec, config)
    try:
        trace = run_workflow(hazard, initial, measures, config.matrix, config.bands)
    except RiskError as exc:
        raise UsageError(f"{args.spec}: {exc}") from None
    if args.format == "json":
        _emit_json({"steps": [step_to_dict(s) for s in trace.steps], "outcome": trace.outcome.value,
                    "iterations": trace.iterations})
    else:
        for i, step in enumerate(trace.steps, 1):
            print(f"{i:>2}. {_step_text(step)}")
    if args.strict and trace.outcome is Outcome.RESIDUAL_REQUIRES_ACCEPTANCE:
        return EXIT_FINDINGS
    return EXIT_OK


# --------------------------------------------------------------------------
# hazlog
# --------------------------------------------------------------------------


def _store(path: str) -> hazardlog.LogStore:
    try:
        return hazardlog.LogStore.open(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: cannot read: {exc}") from None
    except hazardlog.HazardLogFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _risk_args(args, config: RiskConfig) -> Optional[RiskRecord]:
    if args.probability is None and args.likelihood is None:
        if args.severity is not None:
            raise UsageError("--severity needs --likelihood or --probability")
        return None
    if args.severity is None:
        raise UsageError("a risk estimate needs --severity")
    if args.probability is not None and args.likelihood is not None:
        raise UsageError("give --likelihood or --probability, not both")
    try:
        if args.probability is not None:
            return RiskRecord.from_probability(args.probability, args.severity, config.matrix, config.bands)
        return RiskRecord.assess(args.likelihood, args.severity, config.matrix)
    except (RiskError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _print_entry(args, entry: hazardlog.HazardLogEntry) -> None:
    if args.format == "json":
        _emit_json(entry.to_dict())
        return
    goal = entry.hazardous_event_goal or "-"
    print(f"{entry.id} [{entry.status.value}] {entry.hazard} (goal {goal})")
    for r in entry.risk_history:
        print(f"  risk: {format_record(r)}")
    if entry.measures:
        print(f"  measures: {', '.join(entry.measures)}")
    if entry.acceptance is not None:
        a = entry.acceptance
        print(f"  accepted by {a.owner} at {a.timestamp}: {a.rationale}")


def cmd_hazlog_open(args) -> int:
    config = _config(args)
    store = _store(args.store)
    case = _load_case(args.case) if args.case else None
    initial = _risk_args(args, config)
    try:
        entry = hazardlog.open_entry(store, args.hazard, args.goal, case=case, initial=initial,
                                     entry_id=args.id, now=_now(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _print_entry(args, entry)
    return EXIT_OK


def cmd_hazlog_measure(args) -> int:
    config = _config(args)
    store = _store(args.store)
    entry = store.get(args.entry)
    before = _risk_args(args, config) or entry.latest
    if before is None:
        raise UsageError(f"{args.entry} has no risk estimate; pass --likelihood/--probability and --severity")
    try:
        measure = RiskReductionMeasure(
            args.measure_id, args.kind, args.phase,
            likelihood_factor=args.factor, likelihood_step=args.likelihood_step,
            severity_step=args.severity_step, description=args.description or "",
            evidence_ref=EvidenceRef(args.evidence) if args.evidence else None,
        )
        resulting = apply_measure(before, measure, config.matrix, config.bands)
    except (RiskError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    entry = hazardlog.record_measure(store, args.entry, measure, resulting, now=_now(args))
    _print_entry(args, entry)
    return EXIT_OK


def cmd_hazlog_accept(args) -> int:
    store = _store(args.store)
    case = _load_case(args.case)
    try:
        entry = hazardlog.accept_residual(store, args.entry, args.owner, args.rationale, case=case,
                                          now=_now(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _print_entry(args, entry)
    return EXIT_OK


def cmd_hazlog_close(args) -> int:
    store = _store(args.store)
    entry = hazardlog.close_entry(store, args.entry, now=_now(args))
    _print_entry(args, entry)
    return EXIT_OK


def cmd_hazlog_report(args) -> int:
    store = _store(args.store)
    case = _load_case(args.case) if args.case else None
    rep = hazardlog.report(store, case)
    if args.format == "json":
        _emit_json(rep.to_dict())
    else:
        sys.stdout.write(rep.render())
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    # SUPPRESS defaults let these flags appear before or after the command
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS,
                        help="output format (default text)")
    common.add_argument("--matrix", default=argparse.SUPPRESS, metavar="FILE",
                        help=f"risk configuration file (default: ${MATRIX_ENV} or the bundled matrix)")
    common.add_argument("--strict", action="store_true", default=argparse.SUPPRESS,
                        help="check: fail on warnings too; risk: fail when residual needs acceptance")
    common.add_argument("--now", default=argparse.SUPPRESS, metavar="TIMESTAMP",
                        help="fixed clock for hazard-log timestamps")
    return common


# applied after parsing: set_defaults would rewrite the shared parent actions
_GLOBAL_DEFAULTS = {"format": "text", "matrix": None, "strict": False, "now": None}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="caseforge", parents=[common],
                                     description="Author, check and maintain structured safety cases.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("check", parents=[common], help="validate one or more cases")
    p.add_argument("paths", nargs="+", metavar="PATH")
    p.add_argument("--no-lint", dest="no_lint", default=None, metavar="CODES",
                   help="comma-separated rule codes to disable")
    p.add_argument("--phases", default=None, help="required lifecycle phases, comma-separated")
    p.add_argument("--l01-depth", type=int, default=2, help="goal depth checked by L01 (default 2)")
    p.add_argument("--today", default=None, help="date used for evidence expiry (YYYY-MM-DD)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("render", parents=[common], help="print a DOT diagram, Markdown outline or JSON")
    p.add_argument("path")
    p.add_argument("--to", choices=("dot", "markdown", "json"), default="dot")
    p.add_argument("--highlight", default=None, metavar="IDS", help="comma-separated node ids to emphasise")
    p.add_argument("--lanes", action="store_true", help="cluster each hazardous event's support by phase")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("fmt", parents=[common], help="print the case in normalized DSL layout")
    p.add_argument("path")
    p.add_argument("--check", action="store_true", help="exit 1 if the file is not already formatted")
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("export", parents=[common], help="print canonical JSON")
    p.add_argument("path")
    p.set_defaults(func=cmd_export)

    risk = sub.add_parser("risk", help="risk estimation and the reduction workflow")
    rsub = risk.add_subparsers(dest="risk_command", required=True, metavar="SUBCOMMAND")
    p = rsub.add_parser("eval", parents=[common], help="apply every measure and report the residual risk")
    p.add_argument("spec", metavar="HAZARD_SPEC")
    p.set_defaults(func=cmd_risk_eval)
    p = rsub.add_parser("workflow", parents=[common], help="print the reduction workflow trace")
    p.add_argument("spec", metavar="HAZARD_SPEC")
    p.set_defaults(func=cmd_risk_workflow)

    hz = sub.add_parser("hazlog", help="maintain a hazard log")
    hsub = hz.add_subparsers(dest="hazlog_command", required=True, metavar="SUBCOMMAND")

    def estimate_flags(p):
        p.add_argument("--likelihood", default=None)
        p.add_argument("--probability", type=float, default=None)
        p.add_argument("--severity", default=None)

    p = hsub.add_parser("open", parents=[common], help="record a new hazard")
    p.add_argument("store")
    p.add_argument("--hazard", required=True)
    p.add_argument("--goal", default=None, help="hazardous-event goal id in the linked case")
    p.add_argument("--case", default=None, help="case file used to check --goal")
    p.add_argument("--id", default=None, help="entry id (default: next H<n>)")
    estimate_flags(p)
    p.set_defaults(func=cmd_hazlog_open)

    p = hsub.add_parser("measure", parents=[common], help="record a risk reduction measure")
    p.add_argument("store")
    p.add_argument("entry")
    p.add_argument("--measure-id", required=True)
    p.add_argument("--kind", required=True, choices=("eliminate", "modify-design-or-operation", "reduce-severity"))
    p.add_argument("--phase", required=True, choices=[ph.value for ph in LifecyclePhase])
    p.add_argument("--factor", type=float, default=None, help="divide the probability by this factor")
    p.add_argument("--likelihood-step", type=int, default=0)
    p.add_argument("--severity-step", type=int, default=0)
    p.add_argument("--description", default=None)
    p.add_argument("--evidence", default=None)
    estimate_flags(p)
    p.set_defaults(func=cmd_hazlog_measure)

    p = hsub.add_parser("accept", parents=[common], help="risk-owner acceptance of residual risk")
    p.add_argument("store")
    p.add_argument("entry")
    p.add_argument("--owner", required=True)
    p.add_argument("--rationale", required=True)
    p.add_argument("--case", required=True, help="case whose risk owner must match --owner")
    p.set_defaults(func=cmd_hazlog_accept)

    p = hsub.add_parser("close", parents=[common], help="close a resolved hazard")
    p.add_argument("store")
    p.add_argument("entry")
    p.set_defaults(func=cmd_hazlog_close)

    p = hsub.add_parser("report", parents=[common], help="summarize the log")
    p.add_argument("store")
    p.add_argument("--case", default=None, help="cross-check against this case's hazardous-event goals")
    p.set_defaults(func=cmd_hazlog_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for key, value in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        if args.command == "check":
            args.no_lint_codes = _codes(args.no_lint)
        return args.func(args)
    except UsageError as exc:
        print(f"caseforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (hazardlog.IllegalTransition, hazardlog.WrongOwner, hazardlog.NothingToAccept,
            hazardlog.UnknownGoal, hazardlog.DuplicateHazardId) as exc:
        print(f"caseforge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except hazardlog.UnknownEntry as exc:
        print(f"caseforge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (hazardlog.StaleWrite, OSError) as exc:
        print(f"caseforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CaseError as exc:
        print(f"caseforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
