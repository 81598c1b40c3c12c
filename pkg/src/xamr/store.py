"""Per-slot argument store, similarity ranking, and decision semantics.

The store collects every argument value accepted so far, keyed by slot and
(by default) topic, each with the embeddings of the sentences it came from.
Ranking a target sentence scores each stored value by the maximum cosine
over its embeddings, so one strongly matching prior sentence is enough to
surface a value.

Annotator actions are Decision records; the append-only decision log is the
single source of persistence, and replaying it from an empty store must
reproduce the live store bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .annotations import (
    EMPTY,
    ArgValue,
    Empty,
    EntityRef,
    NestedEvent,
    TimeRef,
    arg_equal,
    parse_time,
)
from .corpus import Mention
from .embedding import EmbeddingProvider, HashingEmbedder, cosine
from .errors import SlotValueMismatch, UnknownMention
from .frames import RolesetId, parse_roleset_id


class Slot(Enum):
    ROLESET = "ROLESET"
    ARG0 = "ARG0"
    ARG1 = "ARG1"
    LOC = "LOC"
    TIME = "TIME"


ARG_SLOTS = (Slot.ARG0, Slot.ARG1, Slot.LOC, Slot.TIME)

SlotValue = Union[RolesetId, ArgValue, TimeRef]


def check_slot_value(slot: Slot, value: SlotValue) -> None:
    ok = {
        Slot.ROLESET: lambda v: isinstance(v, RolesetId),
        Slot.ARG0: lambda v: isinstance(v, EntityRef),
        Slot.ARG1: lambda v: isinstance(v, (EntityRef, NestedEvent)),
        Slot.LOC: lambda v: isinstance(v, EntityRef),
        Slot.TIME: lambda v: isinstance(v, TimeRef),
    }[slot](value)
    if not ok:
        raise SlotValueMismatch(f"{type(value).__name__} is not a legal {slot.value} value")


def values_equal(slot: Slot, a: SlotValue, b: SlotValue) -> bool:
    """Deduplication equality: coreference equality for entities, identity on
    roleset ids and full date triples."""
    if isinstance(a, Empty) or isinstance(b, Empty):
        return isinstance(a, Empty) and isinstance(b, Empty)
    if slot is Slot.ROLESET:
        return a == b
    if slot is Slot.TIME:
        return (a.month, a.day, a.year) == (b.month, b.day, b.year)
    return arg_equal(a, b)


def value_sort_key(slot: Slot, value: SlotValue) -> str:
    if slot is Slot.ROLESET:
        return str(value)
    if slot is Slot.TIME:
        return value.canonical()
    if isinstance(value, NestedEvent):
        return f"event:{value.roleset}:{value.linked_mention or ''}"
    return value.normalized


@dataclass
class StoredArgument:
    slot: Slot
    value: SlotValue
    embeddings: list[np.ndarray]
    source_mentions: list[str]
    ordinal: int
    topic_id: int


@dataclass(frozen=True)
class Suggestion:
    value: SlotValue
    score: float
    rank: int


class DecisionAction(Enum):
    ACCEPT = "ACCEPT"
    MODIFY = "MODIFY"
    REJECT_CREATE = "REJECT_CREATE"


@dataclass(frozen=True)
class Decision:
    """One annotator (or adjudication) event on one slot of one mention.

    ``final`` may be None for argument slots: the annotator looked at the
    slot and left it empty (arguments that cannot be inferred stay blank).
    """

    mention_id: str
    slot: Slot
    suggested: Optional[SlotValue]
    action: DecisionAction
    final: Optional[SlotValue]
    annotator_id: str
    timestamp: datetime

    def __post_init__(self):
        if self.action is DecisionAction.ACCEPT:
            if (
                self.suggested is None
                or self.final is None
                or not values_equal(self.slot, self.final, self.suggested)
            ):
                raise ValueError("ACCEPT requires final == suggested")
        if self.suggested is None and self.action is not DecisionAction.REJECT_CREATE:
            raise ValueError("a decision without a suggestion must be REJECT_CREATE")
        if self.slot is Slot.ROLESET and self.final is None:
            raise ValueError("a roleset decision requires a roleset")
        if self.timestamp.tzinfo is None:
            raise ValueError("decision timestamps must be timezone-aware")


class StoreScope(Enum):
    TOPIC = "topic"  # candidate pools are per topic (cross-document within topic)
    GLOBAL = "global"


class ArgumentStore:
    """Mutable collection of stored arguments; writers must be serialized by
    the caller (the service funnels writes through one lock)."""

    def __init__(self, scope: StoreScope = StoreScope.TOPIC):
        self.scope = scope
        self._entries: list[StoredArgument] = []
        self._next_ordinal = 1

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self, slot: Slot | None = None, topic_id: int | None = None) -> list[StoredArgument]:
        out = self._entries
        if slot is not None:
            out = [e for e in out if e.slot is slot]
        if topic_id is not None and self.scope is StoreScope.TOPIC:
            out = [e for e in out if e.topic_id == topic_id]
        return list(out)

    def _find(self, slot: Slot, value: SlotValue, topic_id: int) -> StoredArgument | None:
        for e in self._entries:
            if e.slot is not slot:
                continue
            if self.scope is StoreScope.TOPIC and e.topic_id != topic_id:
                continue
            if values_equal(slot, e.value, value):
                return e
        return None

    def add(
        self,
        slot: Slot,
        value: SlotValue,
        sentence_embedding: np.ndarray,
        mention_id: str,
        topic_id: int,
    ) -> int:
        """Add a value observation. Coreference-equal duplicates gain an extra
        source mention and embedding instead of a new entry. Returns the
        entry's ordinal."""
        check_slot_value(slot, value)
        existing = self._find(slot, value, topic_id)
        if existing is not None:
            existing.source_mentions.append(mention_id)
            existing.embeddings.append(np.array(sentence_embedding, dtype=np.float64))
            return existing.ordinal
        entry = StoredArgument(
            slot=slot,
            value=value,
            embeddings=[np.array(sentence_embedding, dtype=np.float64)],
            source_mentions=[mention_id],
            ordinal=self._next_ordinal,
            topic_id=topic_id,
        )
        self._entries.append(entry)
        self._next_ordinal += 1
        return entry.ordinal

    def value_set(self, slot: Slot, topic_id: int | None = None) -> list[SlotValue]:
        return [e.value for e in self.entries(slot, topic_id)]

    def snapshot(self) -> list[tuple]:
        """Order-stable, comparison-friendly view used by replay equality tests."""
        return [
            (
                e.slot.value,
                value_sort_key(e.slot, e.value),
                tuple(tuple(v) for v in e.embeddings),
                tuple(e.source_mentions),
                e.ordinal,
                e.topic_id,
            )
            for e in self._entries
        ]


def store_add(
    store: ArgumentStore,
    slot: Slot,
    value: SlotValue,
    sentence_embedding: np.ndarray,
    mention_id: str,
    topic_id: int,
) -> int:
    return store.add(slot, value, sentence_embedding, mention_id, topic_id)


def rank(
    store: ArgumentStore,
    slot: Slot,
    target: np.ndarray,
    topic_id: int,
    k: int = 10,
) -> list[Suggestion]:
    """Rank stored values of a slot against a target sentence embedding.

    Score is the max cosine over an entry's embeddings; order is score
    descending, then insertion ordinal ascending, then the value's canonical
    string. At most ``k`` suggestions.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = [
        (max(cosine(target, emb) for emb in e.embeddings), e.ordinal, value_sort_key(e.slot, e.value), e)
        for e in store.entries(slot, topic_id)
    ]
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [
        Suggestion(value=e.value, score=score, rank=i + 1)
        for i, (score, _, _, e) in enumerate(scored[:k])
    ]


def default_selection(suggestions: list[Suggestion]) -> Optional[SlotValue]:
    """The top-ranked value, pre-selected as the annotator's initial choice."""
    return suggestions[0].value if suggestions else None


def apply_decision(
    store: ArgumentStore, decision: Decision, target_embedding: np.ndarray, topic_id: int
) -> ArgumentStore:
    """Fold one decision into the store.

    ACCEPT reinforces the suggested value with the target sentence's
    embedding; MODIFY stores the corrected value; REJECT_CREATE stores the
    annotator-supplied value indexed by the rejected sentence's embedding,
    so the rejected context still retrieves it later.
    """
    if decision.action is DecisionAction.ACCEPT:
        value = decision.suggested
    else:
        value = decision.final
    if value is None or isinstance(value, Empty):
        return store  # slot left empty: recorded in the log, nothing to learn
    if decision.slot is Slot.TIME and value.is_empty():
        return store
    store.add(decision.slot, value, target_embedding, decision.mention_id, topic_id)
    return store


def replay(
    decisions: Iterable[Decision],
    mentions: dict[str, Mention] | Iterable[Mention],
    scope: StoreScope = StoreScope.TOPIC,
    provider: EmbeddingProvider | None = None,
) -> ArgumentStore:
    """Rebuild a store by folding a timestamp-ordered decision log from empty."""
    if not isinstance(mentions, dict):
        mentions = {m.mention_id: m for m in mentions}
    provider = provider or HashingEmbedder()
    store = ArgumentStore(scope)
    for d in decisions:
        mention = mentions.get(d.mention_id)
        if mention is None:
            raise UnknownMention(d.mention_id)
        apply_decision(store, d, provider.embed(mention.sentence_text), mention.topic_id)
    return store


# -- decision log JSONL ---------------------------------------------------------

def slot_value_to_json(slot: Slot, value: Optional[SlotValue]):
    if value is None or isinstance(value, Empty):
        return None
    if slot is Slot.ROLESET:
        return str(value)
    if slot is Slot.TIME:
        return value.canonical()
    if isinstance(value, NestedEvent):
        return {
            "kind": "nested_event",
            "surface": None,
            "wiki": None,
            "roleset_id": str(value.roleset),
            "linked_mention": value.linked_mention,
        }
    return {
        "kind": "entity",
        "surface": value.surface,
        "wiki": value.wiki,
        "roleset_id": None,
        "linked_mention": None,
    }


def slot_value_from_json(slot: Slot, data) -> Optional[SlotValue]:
    if data is None:
        return None
    if slot is Slot.ROLESET:
        return parse_roleset_id(data)
    if slot is Slot.TIME:
        return parse_time(data).time
    if data.get("kind") == "nested_event":
        return NestedEvent(parse_roleset_id(data["roleset_id"]), data.get("linked_mention"))
    return EntityRef(data.get("surface") or "", data.get("wiki"))


def _rfc3339(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


def decision_to_json(d: Decision) -> dict:
    return {
        "mention_id": d.mention_id,
        "slot": d.slot.value,
        "suggested": slot_value_to_json(d.slot, d.suggested),
        "action": d.action.value,
        "final": slot_value_to_json(d.slot, d.final),
        "annotator": d.annotator_id,
        "ts": _rfc3339(d.timestamp),
    }


def decision_from_json(data: dict) -> Decision:
    slot = Slot(data["slot"])
    return Decision(
        mention_id=data["mention_id"],
        slot=slot,
        suggested=slot_value_from_json(slot, data.get("suggested")),
        action=DecisionAction(data["action"]),
        final=slot_value_from_json(slot, data["final"]),
        annotator_id=data["annotator"],
        timestamp=datetime.fromisoformat(data["ts"].replace("Z", "+00:00")),
    )


def append_decision(path: str | Path, d: Decision) -> None:
    with Path(path).open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(decision_to_json(d), ensure_ascii=False) + "\n")
        fh.flush()


def load_decisions(path: str | Path) -> list[Decision]:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(decision_from_json(json.loads(line)))
    return out


def decisions_to_annotations(decisions: Iterable[Decision]) -> list["XAmr"]:
    """Derive one annotation per (mention, annotator) pair that has a roleset
    decision; argument slots come from their own decisions, blanks stay empty."""
    from .annotations import XAmr

    by_pair: dict[tuple[str, str], dict[Slot, Decision]] = {}
    for d in decisions:
        by_pair.setdefault((d.mention_id, d.annotator_id), {})[d.slot] = d

    out = []
    for (mention_id, annotator), slots in sorted(by_pair.items()):
        roleset_decision = slots.get(Slot.ROLESET)
        if roleset_decision is None:
            continue  # phase 1 not done yet

        def final_of(slot: Slot):
            d = slots.get(slot)
            return d.final if d is not None else None

        arg1 = final_of(Slot.ARG1)
        arg_time = final_of(Slot.TIME)
        if arg_time is not None and arg_time.is_empty():
            arg_time = None
        out.append(
            XAmr(
                mention_id=mention_id,
                roleset=roleset_decision.final,
                arg0=final_of(Slot.ARG0),
                arg1=arg1 if arg1 is not None else EMPTY,
                arg_loc=final_of(Slot.LOC),
                arg_time=arg_time,
                annotator_id=annotator,
            )
        )
    return out
