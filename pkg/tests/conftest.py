from datetime import datetime, timezone
from pathlib import Path

import pytest

from xamr.corpus import Mention, ingest_corpus
from xamr.frames import load_frames

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def frames_dir() -> Path:
    return FIXTURES / "frames"


@pytest.fixture(scope="session")
def corpus(corpus_dir):
    return ingest_corpus(corpus_dir)


@pytest.fixture(scope="session")
def frames(frames_dir):
    return load_frames(frames_dir)


def make_mention(
    mention_id: str = "d1:m1",
    topic_id: int = 1,
    doc_id: str = "d1",
    sentence_text: str = "HP today announced that it has signed a definitive agreement to acquire EYP Mission Critical Facilities Inc .",
    trigger: str = "agreement",
    doc_text: str | None = None,
    sentence_offset: int = 0,
    split: str = "train",
) -> Mention:
    start = sentence_text.index(trigger)
    return Mention(
        mention_id=mention_id,
        topic_id=topic_id,
        doc_id=doc_id,
        sentence_idx=0,
        doc_text=doc_text if doc_text is not None else sentence_text,
        sentence_text=sentence_text,
        trigger_start=start,
        trigger_end=start + len(trigger),
        trigger_lemma=trigger.lower(),
        split=split,
        sentence_offset=sentence_offset,
    )


def ts(second: int = 0) -> datetime:
    return datetime(2024, 1, 1, 12, 0, second, tzinfo=timezone.utc)
