"""The annotation unit: a roleset plus four arguments, with validation.

Entity arguments carry the annotated surface form, a normalized form used
for coreference when no wiki link exists, and an optional ``/wiki/<ID>``
identifier. Time arguments are partial month/day/year triples rendered
canonically as ``MM-DD-YYYY`` with ``XX``/``XXXX`` placeholders.

Plain constructors are deliberately lenient so foreign data (LLM output,
hand-edited JSONL) can be represented and then checked: format problems are
reported by :func:`validate_xamr` as Violation values, not exceptions. The
``*.validated`` factories enforce the formats up front for internal use.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Union

from .frames import FrameIndex, RolesetId, parse_roleset_id

_WIKI_RE = re.compile(r"^/wiki/.+$")
_WS_RE = re.compile(r"\s+")


def normalize_surface(surface: str) -> str:
    return _WS_RE.sub(" ", surface.strip()).lower()


@dataclass(frozen=True)
class EntityRef:
    """An entity argument: surface text plus optional wiki identifier."""

    surface: str
    wiki: Optional[str] = None
    normalized: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "normalized", normalize_surface(self.surface))

    @classmethod
    def validated(cls, surface: str, wiki: Optional[str] = None) -> "EntityRef":
        if wiki is not None and not _WIKI_RE.match(wiki):
            raise ValueError(f"wiki identifier must start with /wiki/: {wiki!r}")
        return cls(surface, wiki)


def coref_equal(a: EntityRef, b: EntityRef) -> bool:
    """Coreference equality: same wiki link when both carry one, otherwise
    equal normalized surface."""
    if a.wiki is not None and b.wiki is not None:
        return a.wiki == b.wiki
    return a.normalized == b.normalized


_MONTHS = {
    name: i + 1
    for i, name in enumerate(
        "january february march april may june july august september october november december".split()
    )
}
_MONTHS.update({name[:3]: num for name, num in list(_MONTHS.items())})
_MONTHS["sept"] = 9

_MONTH_NAME_RE = "|".join(sorted(_MONTHS, key=len, reverse=True))
_TEXTUAL_DATE_RE = re.compile(
    rf"^({_MONTH_NAME_RE})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?\s*,?\s*(\d{{4}})$", re.IGNORECASE
)
_SLASH_FULL_RE = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$")
_SLASH_MY_RE = re.compile(r"^(\d{1,2})/(\d{2}|\d{4})$")
_YEAR_RE = re.compile(r"^(\d{4})$")
_CANONICAL_RE = re.compile(r"^(\d{2}|XX)-(\d{2}|XX)-(\d{4}|XXXX)$")


@dataclass(frozen=True)
class TimeRef:
    """A possibly partial date; canonical form ``MM-DD-YYYY`` with XX/XXXX."""

    month: Optional[int] = None
    day: Optional[int] = None
    year: Optional[int] = None

    def canonical(self) -> str:
        mm = f"{self.month:02d}" if self.month is not None else "XX"
        dd = f"{self.day:02d}" if self.day is not None else "XX"
        yyyy = f"{self.year:04d}" if self.year is not None else "XXXX"
        return f"{mm}-{dd}-{yyyy}"

    def is_empty(self) -> bool:
        return self.month is None and self.day is None and self.year is None

    def is_complete(self) -> bool:
        return self.month is not None and self.day is not None and self.year is not None

    def field_problems(self) -> list[str]:
        problems = []
        if self.month is not None and not 1 <= self.month <= 12:
            problems.append(f"month {self.month} out of range")
        if self.day is not None and not 1 <= self.day <= 31:
            problems.append(f"day {self.day} out of range")
        if self.year is not None and not 1000 <= self.year <= 9999:
            problems.append(f"year {self.year} is not four digits")
        if self.day is not None and self.month is None:
            problems.append("day present without month")
        return problems

    @classmethod
    def validated(
        cls, month: Optional[int] = None, day: Optional[int] = None, year: Optional[int] = None
    ) -> "TimeRef":
        t = cls(month, day, year)
        problems = t.field_problems()
        if problems:
            raise ValueError("; ".join(problems))
        return t


def time_overlap(a: TimeRef, b: TimeRef) -> bool:
    """Per-field equality over the fields present on both sides; at least one
    field must be shared. ``7/08`` therefore matches ``July 1st, 2008``."""
    shared = 0
    for fname in ("month", "day", "year"):
        va, vb = getattr(a, fname), getattr(b, fname)
        if va is not None and vb is not None:
            if va != vb:
                return False
            shared += 1
    return shared > 0


def _resolve_two_digit_year(yy: int) -> int:
    return 1900 + yy if yy > 50 else 2000 + yy


@dataclass(frozen=True)
class TimeParse:
    time: TimeRef
    recognized: bool  # False flags unparseable non-empty input


def parse_time(text: str) -> TimeParse:
    """Parse a free-text date into a TimeRef.

    Recognized shapes: ``Month D(st|nd|rd|th)?, YYYY``, ``M/D/YYYY``,
    ``M/YY``, ``M/YYYY``, ``YYYY``, and the canonical ``MM-DD-YYYY`` with
    XX/XXXX placeholders. Two-digit years resolve to 19YY when YY > 50, else
    20YY. Empty input is an empty TimeRef; any other unrecognized input is
    an empty TimeRef flagged as unrecognized.
    """
    text = (text or "").strip()
    if not text:
        return TimeParse(TimeRef(), True)

    m = _TEXTUAL_DATE_RE.match(text)
    if m:
        month = _MONTHS[m.group(1).lower()]
        return _checked(month, int(m.group(2)), int(m.group(3)))
    m = _SLASH_FULL_RE.match(text)
    if m:
        return _checked(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    m = _SLASH_MY_RE.match(text)
    if m:
        year = int(m.group(2))
        if len(m.group(2)) == 2:
            year = _resolve_two_digit_year(year)
        return _checked(int(m.group(1)), None, year)
    m = _YEAR_RE.match(text)
    if m:
        return _checked(None, None, int(m.group(1)))
    m = _CANONICAL_RE.match(text)
    if m:
        month = None if m.group(1) == "XX" else int(m.group(1))
        day = None if m.group(2) == "XX" else int(m.group(2))
        year = None if m.group(3) == "XXXX" else int(m.group(3))
        return _checked(month, day, year)
    return TimeParse(TimeRef(), False)


def _checked(month, day, year) -> TimeParse:
    t = TimeRef(month, day, year)
    if t.field_problems():
        return TimeParse(TimeRef(), False)
    return TimeParse(t, True)


# -- argument values -----------------------------------------------------------

@dataclass(frozen=True)
class NestedEvent:
    """An eventive ARG-1: the head predicate's roleset, optionally linked to
    the mention annotated for that predicate."""

    roleset: RolesetId
    linked_mention: Optional[str] = None


class Empty:
    """Sentinel for an explicitly empty argument slot."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Empty"


EMPTY = Empty()

ArgValue = Union[EntityRef, NestedEvent, Empty]


def nested_equal(a: NestedEvent, b: NestedEvent) -> bool:
    if a.linked_mention is not None and b.linked_mention is not None:
        return a.linked_mention == b.linked_mention
    return a.roleset == b.roleset


def arg_equal(a: ArgValue, b: ArgValue) -> bool:
    if isinstance(a, EntityRef) and isinstance(b, EntityRef):
        return coref_equal(a, b)
    if isinstance(a, NestedEvent) and isinstance(b, NestedEvent):
        return nested_equal(a, b)
    return False


@dataclass(frozen=True)
class XAmr:
    """One annotator's annotation of one mention: roleset plus four arguments."""

    mention_id: str
    roleset: RolesetId
    arg1: ArgValue = EMPTY
    arg0: Optional[EntityRef] = None
    arg_loc: Optional[EntityRef] = None
    arg_time: Optional[TimeRef] = None
    annotator_id: str = ""

    def has_arguments(self) -> bool:
        """True when at least one argument slot is filled (the "annotated
        beyond the roleset" status used by corpus statistics)."""
        return (
            self.arg0 is not None
            or not isinstance(self.arg1, Empty)
            or self.arg_loc is not None
            or (self.arg_time is not None and not self.arg_time.is_empty())
        )


class ViolationCode(Enum):
    UNKNOWN_ROLESET = "UnknownRoleset"
    NESTED_EVENT_OUTSIDE_ARG1 = "NestedEventOutsideArg1"
    WIKI_FORMAT_ERROR = "WikiFormatError"
    TIME_FORMAT_ERROR = "TimeFormatError"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    slot: str
    detail: str = ""


def validate_xamr(x: XAmr, index: FrameIndex) -> list[Violation]:
    """Check an annotation against the frame index and the slot/format rules.

    Violations are data, not failures: an empty list means valid.
    """
    violations: list[Violation] = []
    if x.roleset not in index:
        violations.append(Violation(ViolationCode.UNKNOWN_ROLESET, "roleset", str(x.roleset)))
    if isinstance(x.arg1, NestedEvent) and x.arg1.roleset not in index:
        violations.append(Violation(ViolationCode.UNKNOWN_ROLESET, "arg1", str(x.arg1.roleset)))

    for slot, value in (("arg0", x.arg0), ("arg_loc", x.arg_loc)):
        if isinstance(value, NestedEvent):
            violations.append(Violation(ViolationCode.NESTED_EVENT_OUTSIDE_ARG1, slot))
        elif isinstance(value, EntityRef) and value.wiki is not None and not _WIKI_RE.match(value.wiki):
            violations.append(Violation(ViolationCode.WIKI_FORMAT_ERROR, slot, value.wiki))
    if isinstance(x.arg1, EntityRef) and x.arg1.wiki is not None and not _WIKI_RE.match(x.arg1.wiki):
        violations.append(Violation(ViolationCode.WIKI_FORMAT_ERROR, "arg1", x.arg1.wiki))

    if x.arg_time is not None:
        for problem in x.arg_time.field_problems():
            violations.append(Violation(ViolationCode.TIME_FORMAT_ERROR, "arg_time", problem))
    return violations


@dataclass(frozen=True)
class MatchReport:
    roleset_match: bool
    arg_overlap: dict[str, int]


def xamr_match(a: XAmr, b: XAmr) -> MatchReport:
    """Slot-by-slot comparison of two annotations under coreference equality.

    A slot counts only when present on both sides; time overlap compares the
    fields present on both sides.
    """
    overlap = {"arg0": 0, "arg1": 0, "arg_loc": 0, "arg_time": 0}
    if a.arg0 is not None and b.arg0 is not None and coref_equal(a.arg0, b.arg0):
        overlap["arg0"] = 1
    if not isinstance(a.arg1, Empty) and not isinstance(b.arg1, Empty) and arg_equal(a.arg1, b.arg1):
        overlap["arg1"] = 1
    if a.arg_loc is not None and b.arg_loc is not None and coref_equal(a.arg_loc, b.arg_loc):
        overlap["arg_loc"] = 1
    ta, tb = a.arg_time, b.arg_time
    if ta is not None and tb is not None and not ta.is_empty() and not tb.is_empty() and time_overlap(ta, tb):
        overlap["arg_time"] = 1
    return MatchReport(roleset_match=a.roleset == b.roleset, arg_overlap=overlap)


# -- annotation JSONL ----------------------------------------------------------

def _entity_to_json(e: Optional[EntityRef]) -> Optional[dict]:
    if e is None:
        return None
    return {"surface": e.surface, "wiki": e.wiki}


def _entity_from_json(d: Optional[dict]) -> Optional[EntityRef]:
    if d is None:
        return None
    return EntityRef(d.get("surface") or "", d.get("wiki"))


def _arg1_to_json(v: ArgValue) -> Optional[dict]:
    if isinstance(v, Empty):
        return None
    if isinstance(v, EntityRef):
        return {
            "kind": "entity",
            "surface": v.surface,
            "wiki": v.wiki,
            "roleset_id": None,
            "linked_mention": None,
        }
    return {
        "kind": "nested_event",
        "surface": None,
        "wiki": None,
        "roleset_id": str(v.roleset),
        "linked_mention": v.linked_mention,
    }


def _arg1_from_json(d: Optional[dict]) -> ArgValue:
    if d is None:
        return EMPTY
    if d.get("kind") == "nested_event":
        return NestedEvent(parse_roleset_id(d["roleset_id"]), d.get("linked_mention"))
    return EntityRef(d.get("surface") or "", d.get("wiki"))


def xamr_to_json(x: XAmr) -> dict:
    return {
        "mention_id": x.mention_id,
        "annotator": x.annotator_id,
        "roleset_id": str(x.roleset),
        "arg0": _entity_to_json(x.arg0),
        "arg1": _arg1_to_json(x.arg1),
        "arg_loc": _entity_to_json(x.arg_loc),
        "arg_time": x.arg_time.canonical() if x.arg_time is not None else None,
    }


def xamr_from_json(d: dict) -> XAmr:
    arg_time = None
    if d.get("arg_time") is not None:
        arg_time = parse_time(d["arg_time"]).time
    return XAmr(
        mention_id=d["mention_id"],
        roleset=parse_roleset_id(d["roleset_id"]),
        arg0=_entity_from_json(d.get("arg0")),
        arg1=_arg1_from_json(d.get("arg1")),
        arg_loc=_entity_from_json(d.get("arg_loc")),
        arg_time=arg_time,
        annotator_id=d.get("annotator") or "",
    )


def save_annotations(annotations: Iterable[XAmr], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for x in annotations:
            fh.write(json.dumps(xamr_to_json(x), ensure_ascii=False) + "\n")
            n += 1
    return n


def load_annotations(path: str | Path) -> list[XAmr]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(xamr_from_json(json.loads(line)))
    return out
