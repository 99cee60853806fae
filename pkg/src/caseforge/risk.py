"""Risk classification, risk reduction and the iterative reduction workflow.

Risk is a (likelihood, severity) pair on two 5-point ordinal scales. A
:class:`RiskMatrix` maps every pair to an ALARP zone. Measures reduce
likelihood (dividing a numeric probability, or stepping the ordinal down)
and/or severity, or eliminate the hazard outright.

Default 5x5 matrix (rows likelihood, columns severity 1..5)::

    AlmostCertain   T  T  U  U  U
    Likely          T  T  T  U  U
    Possible        B  T  T  T  U
    Unlikely        B  B  T  T  T
    Rare            B  B  B  T  T

B = BroadlyAcceptable (ordinal sum <= 4, never Catastrophic),
U = Unacceptable (ordinal sum >= 8), T = TolerableALARP otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Union

from .argument import EvidenceRef, LifecyclePhase


class RiskError(Exception):
    pass


class InvalidMatrix(RiskError):
    pass


class BandsUnconfigured(RiskError):
    pass


class OutOfRange(RiskError):
    def __init__(self, p):
        super().__init__(f"probability {p!r} outside (0, 1]")
        self.p = p


class MissingProbability(RiskError):
    pass


class InvalidMeasure(RiskError):
    pass


class _Named(IntEnum):
    """Ordinal with a kebab-case wire name."""

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            return cls(value)
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        for member in cls:
            if member.name.lower() == key or member.name.lower().replace("_", "") == key:
                return member
        raise ValueError(f"unknown {cls.__name__} {value!r}")


class LikelihoodLevel(_Named):
    RARE = 1
    UNLIKELY = 2
    POSSIBLE = 3
    LIKELY = 4
    ALMOST_CERTAIN = 5


class SeverityLevel(_Named):
    NEGLIGIBLE = 1
    MINOR = 2
    MAJOR = 3
    SEVERE = 4
    CATASTROPHIC = 5


class RiskZone(_Named):
    """Ordered so that ``a > b`` means ``a`` is less acceptable."""

    BROADLY_ACCEPTABLE = 1
    TOLERABLE_ALARP = 2
    UNACCEPTABLE = 3


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

DEFAULT_BAND_UPPER = (0.001, 0.01, 0.1, 0.5, 1.0)
BAND_EDGE_RTOL = 1e-12


@dataclass(frozen=True)
class LikelihoodBands:
    """Upper bounds (inclusive) of the five probability bands, Rare first."""

    upper: tuple = DEFAULT_BAND_UPPER

    def __post_init__(self):
        upper = tuple(float(u) for u in self.upper)
        if len(upper) != 5:
            raise InvalidMatrix("likelihood bands need exactly 5 upper bounds")
        if upper[0] <= 0 or upper[-1] != 1.0 or any(a >= b for a, b in zip(upper, upper[1:])):
            raise InvalidMatrix("likelihood band bounds must increase strictly within (0, 1] and end at 1")
        object.__setattr__(self, "upper", upper)

    def band(self, level: LikelihoodLevel) -> tuple[float, float]:
        i = int(level) - 1
        return (0.0 if i == 0 else self.upper[i - 1], self.upper[i])


DEFAULT_BANDS = LikelihoodBands()


def _default_cell(lk: int, sev: int) -> RiskZone:
    total = lk + sev
    if total <= 4 and sev < SeverityLevel.CATASTROPHIC:
        return RiskZone.BROADLY_ACCEPTABLE
    if total >= 8:
        return RiskZone.UNACCEPTABLE
    return RiskZone.TOLERABLE_ALARP


@dataclass(frozen=True)
class RiskMatrix:
    """``cells[likelihood-1][severity-1]`` is the zone of that pair."""

    cells: tuple

    def __post_init__(self):
        try:
            cells = tuple(tuple(RiskZone.parse(z) for z in row) for row in self.cells)
        except (TypeError, ValueError) as exc:
            raise InvalidMatrix(f"bad matrix cell: {exc}") from None
        if len(cells) != 5 or any(len(row) != 5 for row in cells):
            raise InvalidMatrix("risk matrix must be 5x5 (likelihood rows x severity columns)")
        for li in range(5):
            for si in range(5):
                z = cells[li][si]
                if li < 4 and cells[li + 1][si] < z:
                    raise InvalidMatrix(
                        f"not monotone: raising likelihood from {LikelihoodLevel(li + 1).label} at severity "
                        f"{SeverityLevel(si + 1).label} makes the risk more acceptable"
                    )
                if si < 4 and cells[li][si + 1] < z:
                    raise InvalidMatrix(
                        f"not monotone: raising severity from {SeverityLevel(si + 1).label} at likelihood "
                        f"{LikelihoodLevel(li + 1).label} makes the risk more acceptable"
                    )
        object.__setattr__(self, "cells", cells)

    @classmethod
    def default(cls) -> "RiskMatrix":
        return cls(tuple(tuple(_default_cell(lk, sv) for sv in range(1, 6)) for lk in range(1, 6)))

    def zone(self, likelihood: LikelihoodLevel, severity: SeverityLevel) -> RiskZone:
        return self.cells[int(likelihood) - 1][int(severity) - 1]


def classify(likelihood: LikelihoodLevel, severity: SeverityLevel, matrix: Optional[RiskMatrix] = None) -> RiskZone:
    matrix = matrix or RiskMatrix.default()
    return matrix.zone(LikelihoodLevel.parse(likelihood), SeverityLevel.parse(severity))


def map_probability(p: float, bands: Optional[LikelihoodBands] = DEFAULT_BANDS) -> LikelihoodLevel:
    """Band containing ``p``; upper bounds are inclusive.

    A relative slack of 1e-12 keeps quotients such as ``0.3 / 30`` from
    falling one band high through rounding.
    """
    if bands is None:
        raise BandsUnconfigured("no likelihood bands configured")
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not (0 < p <= 1):
        raise OutOfRange(p)
    for level, upper in zip(LikelihoodLevel, bands.upper):
        if p <= upper * (1 + BAND_EDGE_RTOL):
            return level
    raise OutOfRange(p)


@dataclass(frozen=True)
class IntegrityTarget:
    level: int
    note: str


#: target level by zone, indexed by severity - 1
DEFAULT_TARGETS = {
    RiskZone.UNACCEPTABLE: (3, 3, 3, 4, 4),
    RiskZone.TOLERABLE_ALARP: (2, 2, 2, 3, 3),
    RiskZone.BROADLY_ACCEPTABLE: (1, 1, 1, 1, 1),
}


@dataclass(frozen=True)
class RiskConfig:
    matrix: RiskMatrix = field(default_factory=RiskMatrix.default)
    bands: LikelihoodBands = DEFAULT_BANDS
    targets: dict = field(default_factory=lambda: dict(DEFAULT_TARGETS))

    def __post_init__(self):
        targets = {}
        for zone in RiskZone:
            row = self.targets.get(zone)
            if row is None or len(row) != 5 or any(
                isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= 4 for v in row
            ):
                raise InvalidMatrix(f"target table row for {zone.label} must hold five levels in 1..4")
            targets[zone] = tuple(row)
        object.__setattr__(self, "targets", targets)


CONFIG_VERSION = "caseforge-risk/1"


def config_from_dict(doc: dict) -> RiskConfig:
    """Build a :class:`RiskConfig`; any structural problem is InvalidMatrix."""
    if not isinstance(doc, dict):
        raise InvalidMatrix("risk configuration must be a JSON object")
    if doc.get("version") != CONFIG_VERSION:
        raise InvalidMatrix(f"risk configuration version must be {CONFIG_VERSION!r}, got {doc.get('version')!r}")
    try:
        rows = doc["matrix"]
        if not isinstance(rows, dict):
            raise InvalidMatrix("matrix must map likelihood names to rows of zones")
        cells = tuple(tuple(rows[lk.label]) for lk in LikelihoodLevel)
        bands = LikelihoodBands(tuple(doc.get("likelihood_bands", DEFAULT_BAND_UPPER)))
        raw_targets = doc.get("target_levels")
        targets = dict(DEFAULT_TARGETS)
        if raw_targets is not None:
            targets = {RiskZone.parse(k): tuple(v) for k, v in raw_targets.items()}
    except KeyError as exc:
        raise InvalidMatrix(f"risk matrix is not total: missing row {exc}") from None
    except (TypeError, ValueError, AttributeError) as exc:
        raise InvalidMatrix(f"invalid risk configuration: {exc}") from None
    return RiskConfig(RiskMatrix(cells), bands, targets)


def config_to_dict(config: RiskConfig) -> dict:
    return {
        "version": CONFIG_VERSION,
        "likelihood_bands": list(config.bands.upper),
        "matrix": {lk.label: [config.matrix.zone(lk, sv).label for sv in SeverityLevel] for lk in LikelihoodLevel},
        "target_levels": {z.label: list(config.targets[z]) for z in RiskZone},
    }


def load_config(path: Union[str, Path, None] = None) -> RiskConfig:
    """Read a risk configuration file; ``None`` loads the bundled default."""
    if path is None:
        text = resources.files("caseforge").joinpath("data/default_risk.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidMatrix(f"risk configuration is not valid JSON: {exc}") from None
    return config_from_dict(doc)


def map_target_level(zone_before: RiskZone, severity: SeverityLevel, config: Optional[RiskConfig] = None) -> IntegrityTarget:
    """SIL-style integrity target for a hazard, before any reduction.

    The note gives the matching risk-reduction factor range (10^n to 10^(n+1)).
    """
    zone_before = RiskZone.parse(zone_before)
    severity = SeverityLevel.parse(severity)
    targets = config.targets if config else DEFAULT_TARGETS
    level = targets[zone_before][int(severity) - 1]
    note = (
        f"integrity level {level} for {zone_before.label} / {severity.label} risk: "
        f"required risk reduction factor 10^{level} to 10^{level + 1}"
    )
    return IntegrityTarget(level, note)


# --------------------------------------------------------------------------
# Records and measures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RiskRecord:
    """A risk estimate. ``eliminated`` marks a hazard removed outright."""

    likelihood: LikelihoodLevel
    severity: SeverityLevel
    zone: RiskZone
    note: str = ""
    probability: Optional[float] = None
    eliminated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "likelihood", LikelihoodLevel.parse(self.likelihood))
        object.__setattr__(self, "severity", SeverityLevel.parse(self.severity))
        object.__setattr__(self, "zone", RiskZone.parse(self.zone))
        if self.eliminated and self.zone is not RiskZone.BROADLY_ACCEPTABLE:
            raise ValueError("an eliminated hazard carries no risk")

    @classmethod
    def assess(cls, likelihood, severity, matrix: Optional[RiskMatrix] = None, note: str = "",
               probability: Optional[float] = None) -> "RiskRecord":
        likelihood = LikelihoodLevel.parse(likelihood)
        severity = SeverityLevel.parse(severity)
        return cls(likelihood, severity, classify(likelihood, severity, matrix), note, probability)

    @classmethod
    def from_probability(cls, p: float, severity, matrix: Optional[RiskMatrix] = None,
                         bands: LikelihoodBands = DEFAULT_BANDS, note: str = "") -> "RiskRecord":
        return cls.assess(map_probability(p, bands), severity, matrix, note, float(p))

    @classmethod
    def eliminated_marker(cls, severity, note: str = "hazard eliminated") -> "RiskRecord":
        return cls(LikelihoodLevel.RARE, severity, RiskZone.BROADLY_ACCEPTABLE, note, 0.0, True)

    def to_dict(self) -> dict:
        return {
            "likelihood": self.likelihood.label,
            "severity": self.severity.label,
            "zone": self.zone.label,
            "note": self.note,
            "probability": self.probability,
            "eliminated": self.eliminated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RiskRecord":
        return cls(d["likelihood"], d["severity"], d["zone"], d.get("note", ""), d.get("probability"),
                   bool(d.get("eliminated", False)))


class MeasureKind(str, Enum):
    ELIMINATE = "eliminate"
    MODIFY_DESIGN_OR_OPERATION = "modify-design-or-operation"
    REDUCE_SEVERITY = "reduce-severity"


@dataclass(frozen=True)
class RiskReductionMeasure:
    """A mitigation.

    LikelihoodLevel is reduced either by ``likelihood_factor`` (divides a numeric
    probability, which is then re-banded) or by ``likelihood_step``
    (ordinal decrement); not both.
    """

    id: str
    kind: MeasureKind
    phase: LifecyclePhase
    likelihood_factor: Optional[float] = None
    likelihood_step: int = 0
    severity_step: int = 0
    description: str = ""
    evidence_ref: Optional[EvidenceRef] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", MeasureKind(self.kind))
            object.__setattr__(self, "phase", LifecyclePhase(self.phase))
        except ValueError as exc:
            raise InvalidMeasure(str(exc)) from None
        if not self.id:
            raise InvalidMeasure("measure id must be non-empty")
        for name in ("likelihood_step", "severity_step"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InvalidMeasure(f"{self.id}: {name} must be an integer >= 0")
        f = self.likelihood_factor
        if f is not None:
            if isinstance(f, bool) or not isinstance(f, (int, float)) or not f >= 1:
                raise InvalidMeasure(f"{self.id}: likelihood_factor must be >= 1")
            if self.likelihood_step:
                raise InvalidMeasure(f"{self.id}: use likelihood_factor or likelihood_step, not both")
        if self.kind is MeasureKind.REDUCE_SEVERITY and self.severity_step < 1:
            raise InvalidMeasure(f"{self.id}: reduce-severity needs severity_step >= 1")
        if self.kind is MeasureKind.MODIFY_DESIGN_OR_OPERATION and not (
            self.likelihood_step >= 1 or (f is not None and f > 1)
        ):
            raise InvalidMeasure(f"{self.id}: modify-design-or-operation must reduce likelihood")

    def to_dict(self) -> dict:
        ev = self.evidence_ref
        return {
            "id": self.id,
            "kind": self.kind.value,
            "phase": self.phase.value,
            "likelihood_factor": self.likelihood_factor,
            "likelihood_step": self.likelihood_step,
            "severity_step": self.severity_step,
            "description": self.description,
            "evidence": None if ev is None else {
                "uri_or_path": ev.uri_or_path,
                "description": ev.description,
                "dated": ev.dated.isoformat() if ev.dated else None,
                "valid_for_days": ev.valid_for_days,
            },
        }


@dataclass(frozen=True)
class MeasureStep:
    measure_id: str
    before: RiskRecord
    after: RiskRecord


def apply_measure(record: RiskRecord, measure: RiskReductionMeasure, matrix: Optional[RiskMatrix] = None,
                  bands: LikelihoodBands = DEFAULT_BANDS) -> RiskRecord:
    """One reduction step. Ordinals saturate at level 1."""
    matrix = matrix or RiskMatrix.default()
    if record.eliminated:
        return record
    if measure.kind is MeasureKind.ELIMINATE:
        return RiskRecord.eliminated_marker(record.severity, f"eliminated by {measure.id}")
    probability = record.probability
    likelihood = record.likelihood
    if measure.likelihood_factor is not None:
        if probability is None:
            raise MissingProbability(f"{measure.id} divides a probability but the estimate has none")
        probability = probability / measure.likelihood_factor
        likelihood = map_probability(probability, bands)
    elif measure.likelihood_step:
        likelihood = LikelihoodLevel(max(1, int(likelihood) - measure.likelihood_step))
        # an ordinal step leaves no defensible numeric probability
        probability = None
    severity = SeverityLevel(max(1, int(record.severity) - measure.severity_step))
    return RiskRecord(likelihood, severity, matrix.zone(likelihood, severity), f"after {measure.id}", probability)


def _require_probability(initial: RiskRecord, measures: Sequence[RiskReductionMeasure]) -> None:
    # a likelihood step discards the numeric probability, so a later factor
    # measure would have nothing to divide
    have = initial.probability is not None
    for m in measures:
        if m.kind is MeasureKind.ELIMINATE:
            return
        if m.likelihood_factor is not None and not have:
            if initial.probability is None:
                raise MissingProbability("factor-style measures need an initial numeric probability")
            raise MissingProbability(f"{m.id} divides a probability that an earlier likelihood step discarded")
        if m.likelihood_step:
            have = False


def apply_measures(initial: RiskRecord, measures: Sequence[RiskReductionMeasure],
                   matrix: Optional[RiskMatrix] = None,
                   bands: LikelihoodBands = DEFAULT_BANDS) -> tuple[RiskRecord, list[MeasureStep]]:
    """Apply ``measures`` in order; returns the residual and a per-measure trace.

    Raises:
        MissingProbability: a factor measure is given but ``initial`` has no
            numeric probability.
    """
    _require_probability(initial, measures)
    current = initial
    trace = []
    for m in measures:
        after = apply_measure(current, m, matrix, bands)
        trace.append(MeasureStep(m.id, current, after))
        current = after
        if current.eliminated:
            break
    return current, trace


# --------------------------------------------------------------------------
# Workflow
# --------------------------------------------------------------------------


class Outcome(str, Enum):
    ELIMINATED = "eliminated"
    TOLERABLE = "tolerable"
    RESIDUAL_REQUIRES_ACCEPTANCE = "residual-requires-acceptance"


@dataclass(frozen=True)
class IdentifyHazard:
    hazard: str


@dataclass(frozen=True)
class EstimateRisk:
    record: RiskRecord


@dataclass(frozen=True)
class EvaluateRisk:
    zone: RiskZone


@dataclass(frozen=True)
class ApplyMeasure:
    measure_id: str


@dataclass(frozen=True)
class Terminate:
    outcome: Outcome


def step_to_dict(step) -> dict:
    if isinstance(step, IdentifyHazard):
        return {"step": "identify-hazard", "hazard": step.hazard}
    if isinstance(step, EstimateRisk):
        return {"step": "estimate-risk", "risk": step.record.to_dict()}
    if isinstance(step, EvaluateRisk):
        return {"step": "evaluate-risk", "zone": step.zone.label}
    if isinstance(step, ApplyMeasure):
        return {"step": "apply-measure", "measure": step.measure_id}
    return {"step": "terminate", "outcome": step.outcome.value}


@dataclass(frozen=True)
class WorkflowTrace:
    steps: tuple

    @property
    def outcome(self) -> Outcome:
        return self.steps[-1].outcome

    @property
    def iterations(self) -> int:
        """Number of estimate/evaluate rounds."""
        return sum(isinstance(s, EvaluateRisk) for s in self.steps)

    @property
    def residual(self) -> RiskRecord:
        return [s for s in self.steps if isinstance(s, EstimateRisk)][-1].record


def run_workflow(hazard: str, initial: RiskRecord, measures: Sequence[RiskReductionMeasure],
                 matrix: Optional[RiskMatrix] = None,
                 bands: LikelihoodBands = DEFAULT_BANDS) -> WorkflowTrace:
    """Identify, then loop estimate -> evaluate -> (stop | apply next measure).

    Stops as Tolerable once the risk is broadly acceptable, as Eliminated
    after an elimination measure, and otherwise as
    ResidualRequiresAcceptance when measures run out. Only broadly
    acceptable risk ends the loop early; tolerable-ALARP risk still goes
    to the risk owner.
    """
    matrix = matrix or RiskMatrix.default()
    _require_probability(initial, measures)
    steps: list = [IdentifyHazard(hazard)]
    current = initial
    pending = list(measures)
    while True:
        steps.append(EstimateRisk(current))
        steps.append(EvaluateRisk(current.zone))
        if current.eliminated:
            steps.append(Terminate(Outcome.ELIMINATED))
            break
        if current.zone is RiskZone.BROADLY_ACCEPTABLE:
            steps.append(Terminate(Outcome.TOLERABLE))
            break
        if not pending:
            steps.append(Terminate(Outcome.RESIDUAL_REQUIRES_ACCEPTANCE))
            break
        m = pending.pop(0)
        steps.append(ApplyMeasure(m.id))
        current = apply_measure(current, m, matrix, bands)
    return WorkflowTrace(tuple(steps))
