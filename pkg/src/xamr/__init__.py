"""Corpus-level event annotation: PropBank rolesets plus four arguments
(agent, patient-or-theme, location, time) over a topic-organized corpus,
with embedding-ranked suggestions, a two-step LLM extraction pipeline,
agreement metrics, and an HTTP annotation service.
"""

from .annotations import (
    EMPTY,
    Empty,
    EntityRef,
    MatchReport,
    NestedEvent,
    TimeRef,
    Violation,
    ViolationCode,
    XAmr,
    coref_equal,
    parse_time,
    validate_xamr,
    xamr_match,
)
from .corpus import Corpus, Document, Mention, assign_split, ingest_corpus
from .embedding import HashingEmbedder, cosine, embed
from .frames import FrameIndex, Roleset, RolesetId, load_frames, parse_roleset_id, search_rolesets
from .store import (
    ArgumentStore,
    Decision,
    DecisionAction,
    Slot,
    StoredArgument,
    Suggestion,
    apply_decision,
    default_selection,
    rank,
    replay,
    store_add,
)

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "Empty",
    "EntityRef",
    "MatchReport",
    "NestedEvent",
    "TimeRef",
    "Violation",
    "ViolationCode",
    "XAmr",
    "coref_equal",
    "parse_time",
    "validate_xamr",
    "xamr_match",
    "Corpus",
    "Document",
    "Mention",
    "assign_split",
    "ingest_corpus",
    "HashingEmbedder",
    "cosine",
    "embed",
    "FrameIndex",
    "Roleset",
    "RolesetId",
    "load_frames",
    "parse_roleset_id",
    "search_rolesets",
    "ArgumentStore",
    "Decision",
    "DecisionAction",
    "Slot",
    "StoredArgument",
    "Suggestion",
    "apply_decision",
    "default_selection",
    "rank",
    "replay",
    "store_add",
    "__version__",
]
