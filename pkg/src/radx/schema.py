"""Question schema, core record types, and the JSONL corpus format.

Everything downstream (prompt rendering, form parsing, normalization,
evaluation) is keyed to the fixed 11-question schema defined here.  All
types are immutable value objects and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional


class AnswerKind(Enum):
    CATEGORICAL = "categorical"
    NUMERICAL = "numerical"
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class QuestionSpec:
    """One extraction question: stable id (1..11), display text, answer kind."""

    id: int
    text: str
    kind: AnswerKind


QUESTIONS: tuple[QuestionSpec, ...] = (
    QuestionSpec(1, "Tumor location", AnswerKind.CATEGORICAL),
    QuestionSpec(2, "Tumor long diameter", AnswerKind.NUMERICAL),
    QuestionSpec(3, "Tumor short diameter", AnswerKind.NUMERICAL),
    QuestionSpec(4, "Is the tumor solid", AnswerKind.BOOLEAN),
    QuestionSpec(5, "Is the tumor ground-glass opacity", AnswerKind.BOOLEAN),
    QuestionSpec(6, "Is the tumor mixed ground-glass opacity", AnswerKind.BOOLEAN),
    QuestionSpec(7, "Does the tumor have spiculations", AnswerKind.BOOLEAN),
    QuestionSpec(8, "Does the tumor have lobulations", AnswerKind.BOOLEAN),
    QuestionSpec(9, "Is there pleural invasion or indentation", AnswerKind.BOOLEAN),
    QuestionSpec(10, "Are mediastinal lymph nodes enlarged", AnswerKind.BOOLEAN),
    QuestionSpec(11, "Are hilar lymph nodes enlarged", AnswerKind.BOOLEAN),
)

QUESTION_IDS: tuple[int, ...] = tuple(q.id for q in QUESTIONS)


def question_schema() -> list[QuestionSpec]:
    """Return the 11 extraction questions in canonical order."""
    return list(QUESTIONS)


def question_by_id(question_id: int) -> QuestionSpec:
    for spec in QUESTIONS:
        if spec.id == question_id:
            return spec
    raise KeyError(f"no question with id {question_id}")


class LocationCategory(Enum):
    """Normalized tumor location.  There is no left middle lobe."""

    RIGHT_UPPER_LOBE = "RUL"
    RIGHT_MIDDLE_LOBE = "RML"
    RIGHT_LOWER_LOBE = "RLL"
    LEFT_UPPER_LOBE = "LUL"
    LEFT_LOWER_LOBE = "LLL"
    OTHER = "OTHER"

    @property
    def code(self) -> str:
        return self.value

    @classmethod
    def from_code(cls, code: str) -> "LocationCategory":
        try:
            return cls(code.upper())
        except ValueError:
            raise ValueError(f"unknown location code: {code!r}") from None


# Warning codes accumulated during parsing/normalization.  The set is open;
# these are the codes the built-in pipeline emits.
UNIT_ASSUMED_MM = "UNIT_ASSUMED_MM"
NUMERIC_UNPARSEABLE = "NUMERIC_UNPARSEABLE"
NONPOSITIVE_LENGTH = "NONPOSITIVE_LENGTH"
UNRECOGNIZED_BOOLEAN = "UNRECOGNIZED_BOOLEAN"
FORM_NOT_FOUND = "FORM_NOT_FOUND"
LONG_LT_SHORT = "LONG_LT_SHORT"


@dataclass(frozen=True)
class Report:
    """A free-text CT report with a stable identifier."""

    id: str
    text: str

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("report id must be non-empty")
        if not self.text or not self.text.strip():
            raise ValueError(f"report {self.id!r} has empty text")


def _check_fields(
    owner: str,
    solid: bool,
    ground_glass: bool,
    mixed_ground_glass: bool,
    long_diameter_mm: Optional[float],
    short_diameter_mm: Optional[float],
) -> None:
    if sum((solid, ground_glass, mixed_ground_glass)) > 1:
        raise ValueError(f"{owner}: density labels must be mutually exclusive")
    for name, value in (
        ("long_diameter_mm", long_diameter_mm),
        ("short_diameter_mm", short_diameter_mm),
    ):
        if value is not None and not value > 0:
            raise ValueError(f"{owner}: {name} must be strictly positive, got {value}")


@dataclass(frozen=True)
class StructuredRecord:
    """Normalized 11-field extraction result for one report.

    ``warnings`` carries machine-readable codes describing normalization
    uncertainty (assumed units, unrecognized booleans, ...).  At most one
    density flag is true; construction enforces this.
    """

    report_id: str
    location: LocationCategory
    long_diameter_mm: Optional[float]
    short_diameter_mm: Optional[float]
    solid: bool
    ground_glass: bool
    mixed_ground_glass: bool
    spiculation: bool
    lobulation: bool
    pleural_invasion: bool
    mediastinal_ln_enlarged: bool
    hilar_ln_enlarged: bool
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _check_fields(
            f"record {self.report_id!r}",
            self.solid,
            self.ground_glass,
            self.mixed_ground_glass,
            self.long_diameter_mm,
            self.short_diameter_mm,
        )

    def to_json_dict(self) -> dict:
        out = {name: getattr(self, name) for _, name in QUESTION_FIELDS.items()}
        out["location"] = self.location.code
        out["report_id"] = self.report_id
        out["warnings"] = list(self.warnings)
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "StructuredRecord":
        kwargs = {name: data[name] for _, name in QUESTION_FIELDS.items()}
        kwargs["location"] = LocationCategory.from_code(data["location"])
        return cls(
            report_id=data["report_id"],
            warnings=tuple(data.get("warnings", ())),
            **kwargs,
        )


@dataclass(frozen=True)
class GoldLabel:
    """Manually adjudicated ground truth; same shape as StructuredRecord minus warnings."""

    report_id: str
    location: LocationCategory
    long_diameter_mm: Optional[float]
    short_diameter_mm: Optional[float]
    solid: bool
    ground_glass: bool
    mixed_ground_glass: bool
    spiculation: bool
    lobulation: bool
    pleural_invasion: bool
    mediastinal_ln_enlarged: bool
    hilar_ln_enlarged: bool

    def __post_init__(self) -> None:
        _check_fields(
            f"gold {self.report_id!r}",
            self.solid,
            self.ground_glass,
            self.mixed_ground_glass,
            self.long_diameter_mm,
            self.short_diameter_mm,
        )

    def to_record(self) -> StructuredRecord:
        """The StructuredRecord a perfect extraction of this label would produce."""
        return StructuredRecord(
            report_id=self.report_id,
            **{name: getattr(self, name) for _, name in QUESTION_FIELDS.items()},
        )


# Question id -> record/gold attribute holding that question's value.
QUESTION_FIELDS: dict[int, str] = {
    1: "location",
    2: "long_diameter_mm",
    3: "short_diameter_mm",
    4: "solid",
    5: "ground_glass",
    6: "mixed_ground_glass",
    7: "spiculation",
    8: "lobulation",
    9: "pleural_invasion",
    10: "mediastinal_ln_enlarged",
    11: "hilar_ln_enlarged",
}

GOLD_VALUE_FIELDS: tuple[str, ...] = tuple(QUESTION_FIELDS.values())


class CorpusError(ValueError):
    """Raised for malformed corpus files; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def _gold_from_json(report_id: str, data: dict, line_no: int) -> GoldLabel:
    try:
        kwargs = {}
        for name in GOLD_VALUE_FIELDS:
            if name not in data:
                raise CorpusError(f"gold object missing field {name!r}", line_no)
            kwargs[name] = data[name]
        kwargs["location"] = LocationCategory.from_code(kwargs["location"])
        for name in ("long_diameter_mm", "short_diameter_mm"):
            if kwargs[name] is not None:
                kwargs[name] = float(kwargs[name])
        for name in GOLD_VALUE_FIELDS[3:]:
            if not isinstance(kwargs[name], bool):
                raise CorpusError(f"gold field {name!r} must be a boolean", line_no)
        return GoldLabel(report_id=report_id, **kwargs)
    except CorpusError:
        raise
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"invalid gold object: {exc}", line_no) from exc


def _gold_to_json(gold: GoldLabel) -> dict:
    out = {name: getattr(gold, name) for name in GOLD_VALUE_FIELDS}
    out["location"] = gold.location.code
    return out


def load_corpus(path: str | Path) -> list[tuple[Report, Optional[GoldLabel]]]:
    """Load a JSONL corpus of ``{"id", "text", "gold"?}`` objects.

    Raises CorpusError (with the offending line number) on malformed lines,
    duplicate ids, or invalid gold objects.
    """
    items: list[tuple[Report, Optional[GoldLabel]]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON ({exc.msg})", line_no) from exc
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise CorpusError("expected an object with 'id' and 'text'", line_no)
            report_id = str(obj["id"])
            if report_id in seen:
                raise CorpusError(f"duplicate report id {report_id!r}", line_no)
            seen.add(report_id)
            try:
                report = Report(id=report_id, text=str(obj["text"]))
            except ValueError as exc:
                raise CorpusError(str(exc), line_no) from exc
            gold = None
            if obj.get("gold") is not None:
                if not isinstance(obj["gold"], dict):
                    raise CorpusError("'gold' must be an object", line_no)
                gold = _gold_from_json(report_id, obj["gold"], line_no)
            items.append((report, gold))
    return items


def save_corpus(
    items: Iterable[tuple[Report, Optional[GoldLabel]]], path: str | Path
) -> None:
    """Write reports (and gold labels when present) in the JSONL corpus format."""
    with open(path, "w", encoding="utf-8") as fh:
        for report, gold in items:
            obj: dict = {"id": report.id, "text": report.text}
            if gold is not None:
                obj["gold"] = _gold_to_json(gold)
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
