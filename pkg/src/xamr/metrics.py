"""Annotation analyses: acceptance ratios, agreement, accuracy, corpus stats.

All functions are pure over immutable inputs. Reports render either as
aligned-column text or as JSON documents.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Hashable, Mapping, Optional, Sequence

from .annotations import XAmr, time_overlap, xamr_match
from .corpus import Corpus
from .errors import EmptyIntersection, MentionMismatch
from .frames import RolesetId
from .store import ARG_SLOTS, Decision, DecisionAction, Slot

POOLED_ARG_LABEL = "ARG (pooled)"  # our aggregation over the four argument slots


@dataclass(frozen=True)
class AcceptanceCell:
    accepted: int
    modified: int
    rejected: int

    @property
    def total(self) -> int:
        return self.accepted + self.modified + self.rejected

    @property
    def rates(self) -> Optional[tuple[float, float, float]]:
        if self.total == 0:
            return None  # undefined, flagged by the caller
        return (
            self.accepted / self.total,
            self.modified / self.total,
            self.rejected / self.total,
        )


@dataclass(frozen=True)
class AcceptanceReport:
    """Per (annotator, slot label) decision outcome counts and rates. Slot
    labels are the five slots plus a pooled argument row."""

    cells: dict[tuple[str, str], AcceptanceCell]

    def to_json(self) -> dict:
        out = {}
        for (annotator, slot), cell in sorted(self.cells.items()):
            rates = cell.rates
            out.setdefault(annotator, {})[slot] = {
                "accepted": cell.accepted,
                "modified": cell.modified,
                "rejected": cell.rejected,
                "total": cell.total,
                "accept_rate": None if rates is None else rates[0],
                "modify_rate": None if rates is None else rates[1],
                "reject_rate": None if rates is None else rates[2],
            }
        return out


def acceptance_ratios(log: Sequence[Decision]) -> AcceptanceReport:
    """Group decisions by annotator and slot and count outcomes.

    Decisions made with no suggestion on the table say nothing about the
    model, so they are excluded from the counts and rates.
    """
    counts: dict[tuple[str, str], Counter] = defaultdict(Counter)
    for d in log:
        if d.suggested is None:
            continue
        outcome = {
            DecisionAction.ACCEPT: "accepted",
            DecisionAction.MODIFY: "modified",
            DecisionAction.REJECT_CREATE: "rejected",
        }[d.action]
        counts[(d.annotator_id, d.slot.value)][outcome] += 1
        if d.slot in ARG_SLOTS:
            counts[(d.annotator_id, POOLED_ARG_LABEL)][outcome] += 1

    annotators = sorted({a for a, _ in counts})
    labels = [s.value for s in Slot] + [POOLED_ARG_LABEL]
    cells = {}
    for annotator in annotators:
        for label in labels:
            c = counts.get((annotator, label), Counter())
            cells[(annotator, label)] = AcceptanceCell(c["accepted"], c["modified"], c["rejected"])
    return AcceptanceReport(cells)


def raw_agreement(a: Mapping[str, Hashable], b: Mapping[str, Hashable]) -> float:
    """Fraction of commonly annotated mentions with identical labels."""
    common = set(a) & set(b)
    if not common:
        raise EmptyIntersection("no commonly annotated mentions")
    agree = sum(1 for m in common if a[m] == b[m])
    return agree / len(common)


def cohens_kappa(a: Mapping[str, Hashable], b: Mapping[str, Hashable]) -> float:
    """Chance-corrected agreement from the two marginal label distributions.

    When expected agreement is 1 the statistic is defined as 1.0 for perfect
    observed agreement and 0.0 otherwise.
    """
    common = sorted(set(a) & set(b))
    if not common:
        raise EmptyIntersection("no commonly annotated mentions")
    n = len(common)
    p_o = sum(1 for m in common if a[m] == b[m]) / n
    marg_a = Counter(a[m] for m in common)
    marg_b = Counter(b[m] for m in common)
    p_e = sum((marg_a[label] / n) * (marg_b[label] / n) for label in marg_a)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


GPT_ACCURACY_FIELDS = ("roleset", "ARG-0", "ARG-1", "ARG-Loc", "ARG-Time")


@dataclass(frozen=True)
class GptAccuracyReport:
    accuracy: dict[str, float]
    total: int

    def to_json(self) -> dict:
        return {"total": self.total, "accuracy": dict(self.accuracy)}


def gpt_accuracy(pred: Sequence[XAmr], gold: Sequence[XAmr]) -> GptAccuracyReport:
    """Per-field fraction of predictions an adjudicator left unmodified.

    Equality follows the coreference/date matching rules; a field empty on
    both sides is correct, empty on exactly one side is a modification.
    """
    pred_by_id = {x.mention_id: x for x in pred}
    gold_by_id = {x.mention_id: x for x in gold}
    if set(pred_by_id) != set(gold_by_id):
        missing = set(pred_by_id) ^ set(gold_by_id)
        raise MentionMismatch(f"prediction/gold mention sets differ: {sorted(missing)[:5]}")
    if not pred_by_id:
        raise MentionMismatch("empty annotation sets")

    correct = Counter()
    for mid, p in pred_by_id.items():
        g = gold_by_id[mid]
        report = xamr_match(p, g)
        if report.roleset_match:
            correct["roleset"] += 1
        for field_name, slot_key in (("ARG-0", "arg0"), ("ARG-1", "arg1"), ("ARG-Loc", "arg_loc")):
            p_present = _slot_present(p, slot_key)
            g_present = _slot_present(g, slot_key)
            if not p_present and not g_present:
                correct[field_name] += 1
            elif p_present and g_present and report.arg_overlap[slot_key]:
                correct[field_name] += 1
        pt, gt = p.arg_time, g.arg_time
        p_present = pt is not None and not pt.is_empty()
        g_present = gt is not None and not gt.is_empty()
        if not p_present and not g_present:
            correct["ARG-Time"] += 1
        elif p_present and g_present and time_overlap(pt, gt):
            correct["ARG-Time"] += 1

    n = len(pred_by_id)
    return GptAccuracyReport(
        accuracy={f: correct[f] / n for f in GPT_ACCURACY_FIELDS}, total=n
    )


def _slot_present(x: XAmr, slot_key: str) -> bool:
    from .annotations import Empty

    value = getattr(x, slot_key if slot_key != "arg1" else "arg1")
    if slot_key == "arg1":
        return not isinstance(value, Empty)
    return value is not None


@dataclass(frozen=True)
class SplitStats:
    documents: int
    mentions: int
    w_xamr: int
    w_nested_arg1: int
    w_arg_loc: int
    w_arg_time: int


@dataclass(frozen=True)
class CorpusStatsReport:
    splits: dict[str, SplitStats]

    def to_json(self) -> dict:
        return {
            split: {
                "documents": s.documents,
                "mentions": s.mentions,
                "w_xamr": s.w_xamr,
                "w_nested_arg1": s.w_nested_arg1,
                "w_arg_loc": s.w_arg_loc,
                "w_arg_time": s.w_arg_time,
            }
            for split, s in sorted(self.splits.items())
        }


def corpus_stats(corpus: Corpus, annotations: Sequence[XAmr] = ()) -> CorpusStatsReport:
    """Per-split document/mention counts plus how many mentions carry
    arguments, a nested ARG-1, a location, and a time. A mention counts once
    however many annotators covered it."""
    from .annotations import NestedEvent

    split_of = {m.mention_id: m.split for m in corpus.mentions}
    doc_counts = Counter()
    for doc in corpus.documents:
        doc_counts[_split_of_topic(corpus, doc.topic_id)] += 1
    mention_counts = Counter(m.split for m in corpus.mentions)

    flags: dict[str, dict[str, set]] = {
        key: defaultdict(set) for key in ("w_xamr", "w_nested_arg1", "w_arg_loc", "w_arg_time")
    }
    for x in annotations:
        split = split_of.get(x.mention_id)
        if split is None:
            continue
        if x.has_arguments():
            flags["w_xamr"][split].add(x.mention_id)
        if isinstance(x.arg1, NestedEvent):
            flags["w_nested_arg1"][split].add(x.mention_id)
        if x.arg_loc is not None:
            flags["w_arg_loc"][split].add(x.mention_id)
        if x.arg_time is not None and not x.arg_time.is_empty():
            flags["w_arg_time"][split].add(x.mention_id)

    splits = {}
    for split in sorted(set(doc_counts) | set(mention_counts)):
        splits[split] = SplitStats(
            documents=doc_counts[split],
            mentions=mention_counts[split],
            w_xamr=len(flags["w_xamr"][split]),
            w_nested_arg1=len(flags["w_nested_arg1"][split]),
            w_arg_loc=len(flags["w_arg_loc"][split]),
            w_arg_time=len(flags["w_arg_time"][split]),
        )
    return CorpusStatsReport(splits)


def _split_of_topic(corpus: Corpus, topic_id: int) -> str:
    from .corpus import assign_split

    return assign_split(topic_id, corpus.dev_topics, declared_topics={topic_id})


@dataclass(frozen=True)
class AgreementReport:
    common_mention_count: int
    raw_agreement: float
    cohens_kappa: float

    def to_json(self) -> dict:
        return {
            "common_mention_count": self.common_mention_count,
            "raw_agreement": self.raw_agreement,
            "cohens_kappa": self.cohens_kappa,
        }


def agreement(
    a: Mapping[str, RolesetId], b: Mapping[str, RolesetId]
) -> AgreementReport:
    common = set(a) & set(b)
    return AgreementReport(
        common_mention_count=len(common),
        raw_agreement=raw_agreement(a, b),
        cohens_kappa=cohens_kappa(a, b),
    )


# -- rendering -----------------------------------------------------------------

def _table(rows: list[list[str]]) -> str:
    if not rows:
        return ""
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows
    )


def _fmt_rate(value: Optional[float]) -> str:
    return "--" if value is None else f"{value:.3f}"


def render_acceptance(report: AcceptanceReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_json(), indent=1)
    rows = [["annotator", "slot", "accept", "modify", "reject", "total"]]
    for (annotator, slot), cell in sorted(report.cells.items()):
        rates = cell.rates
        rows.append(
            [
                annotator,
                slot,
                _fmt_rate(None if rates is None else rates[0]),
                _fmt_rate(None if rates is None else rates[1]),
                _fmt_rate(None if rates is None else rates[2]),
                str(cell.total),
            ]
        )
    return _table(rows)


def render_stats(report: CorpusStatsReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_json(), indent=1)
    rows = [["split", "documents", "mentions", "w/ X-AMR", "w/ Nested ARG-1", "w/ ARG-Loc", "w/ ARG-Time"]]
    for split, s in sorted(report.splits.items()):
        rows.append(
            [
                split,
                str(s.documents),
                str(s.mentions),
                str(s.w_xamr),
                str(s.w_nested_arg1),
                str(s.w_arg_loc),
                str(s.w_arg_time),
            ]
        )
    return _table(rows)


def render_agreement(report: AgreementReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_json(), indent=1)
    rows = [
        ["common mentions", str(report.common_mention_count)],
        ["raw agreement", f"{report.raw_agreement:.4f}"],
        ["cohen's kappa", f"{report.cohens_kappa:.4f}"],
    ]
    return _table(rows)


def render_gpt_accuracy(report: GptAccuracyReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_json(), indent=1)
    rows = [["field", "accuracy"]]
    for field_name in GPT_ACCURACY_FIELDS:
        rows.append([field_name, f"{report.accuracy[field_name]:.4f}"])
    rows.append(["mentions", str(report.total)])
    return _table(rows)
