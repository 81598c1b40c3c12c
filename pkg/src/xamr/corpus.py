"""Topic-organized corpus ingestion with train/dev/test splits.

Corpus files are one XML file per document: a ``Document`` root with
``token`` elements (attributes ``t_id``, ``sentence``, ``number``) and a
``Markables`` section whose event-mention elements anchor tokens via
``token_anchor t_id`` children. The topic id comes from the containing
directory name or the filename prefix (``36_2ecb`` -> topic 36).

Sentence and document text are reconstructed by joining tokens with single
spaces; trigger spans are character offsets into the joined sentence.

If the standard validated-sentences CSV (``ECBplus_coreference_sentences.csv``)
sits in the corpus directory, mentions are restricted to the listed
(topic, document, sentence) triples, matching the cleaned evaluation subset.
"""

from __future__ import annotations

import csv
import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import CorpusParseError, DanglingMarkable, UnknownTopic

TRAIN, DEV, TEST = "train", "dev", "test"

# Standardized dev topics within 1-35 (Cybulska & Vossen split); overridable.
DEFAULT_DEV_TOPICS = frozenset({2, 5, 12, 18, 21, 23, 34, 35})

VALIDATED_SENTENCES_CSV = "ECBplus_coreference_sentences.csv"

_EVENT_TAG_RE = re.compile(r"ACTION|NEG_ACTION")


def assign_split(
    topic_id: int,
    dev_topics: Iterable[int] = DEFAULT_DEV_TOPICS,
    declared_topics: Iterable[int] = (),
) -> str:
    """Split for a topic: 1-35 are train or dev per the dev-topic list,
    36-45 are test. Topics above 45 raise UnknownTopic unless the corpus
    declared them, in which case they fall into train.
    """
    if topic_id < 1:
        raise UnknownTopic(f"topic ids start at 1, got {topic_id}")
    if 1 <= topic_id <= 35:
        return DEV if topic_id in set(dev_topics) else TRAIN
    if 36 <= topic_id <= 45:
        return TEST
    if topic_id in set(declared_topics):
        return TRAIN
    raise UnknownTopic(f"topic {topic_id} outside 1-45 and not declared by the corpus")


def lemma_fallback(text: str) -> str:
    """Crude rule-based lemma: lowercase and strip common inflection suffixes."""
    out = []
    for tok in text.lower().split():
        for suffix, repl in (("ies", "y"), ("sses", "ss"), ("ing", ""), ("ed", ""), ("s", "")):
            if tok.endswith(suffix) and len(tok) - len(suffix) >= 2:
                tok = tok[: len(tok) - len(suffix)] + repl
                if tok.endswith(("xe", "ze", "che", "she", "sse")) and suffix == "s":
                    tok = tok[:-1]
                break
        out.append(tok)
    return " ".join(out)


@dataclass(frozen=True)
class Mention:
    """One gold event-trigger occurrence in a document."""

    mention_id: str
    topic_id: int
    doc_id: str
    sentence_idx: int
    doc_text: str
    sentence_text: str
    trigger_start: int
    trigger_end: int
    trigger_lemma: str
    split: str
    sentence_offset: int  # char offset of sentence_text within doc_text
    gold_cluster_id: str | None = None

    def __post_init__(self):
        if not (0 <= self.trigger_start < self.trigger_end <= len(self.sentence_text)):
            raise ValueError(
                f"trigger span ({self.trigger_start},{self.trigger_end}) outside sentence "
                f"of length {len(self.sentence_text)} for {self.mention_id}"
            )

    @property
    def trigger_text(self) -> str:
        return self.sentence_text[self.trigger_start : self.trigger_end]

    @property
    def doc_trigger_span(self) -> tuple[int, int]:
        return (self.sentence_offset + self.trigger_start, self.sentence_offset + self.trigger_end)


@dataclass(frozen=True)
class Document:
    doc_id: str
    topic_id: int
    sentences: tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.sentences)

    def sentence_offset(self, idx: int) -> int:
        return sum(len(s) + 1 for s in self.sentences[:idx])


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)
    mentions: list[Mention] = field(default_factory=list)
    dev_topics: frozenset[int] = DEFAULT_DEV_TOPICS

    @property
    def topics(self) -> dict[int, list[Document]]:
        out: dict[int, list[Document]] = {}
        for doc in self.documents:
            out.setdefault(doc.topic_id, []).append(doc)
        return out

    def document(self, doc_id: str) -> Document:
        for doc in self.documents:
            if doc.doc_id == doc_id:
                return doc
        raise KeyError(doc_id)

    def mention(self, mention_id: str) -> Mention:
        for m in self.mentions:
            if m.mention_id == mention_id:
                return m
        raise KeyError(mention_id)

    def normalized(self) -> "Corpus":
        return Corpus(
            documents=sorted(self.documents, key=lambda d: (d.topic_id, d.doc_id)),
            mentions=sorted(self.mentions, key=lambda m: m.mention_id),
            dev_topics=self.dev_topics,
        )

    def validate(self) -> None:
        by_topic = {(d.topic_id, d.doc_id) for d in self.documents}
        for m in self.mentions:
            if (m.topic_id, m.doc_id) not in by_topic:
                raise CorpusParseError(f"mention {m.mention_id} references missing document {m.doc_id}")


def _topic_of(path: Path) -> int:
    if path.parent.name.isdigit():
        return int(path.parent.name)
    m = re.match(r"^(\d+)_", path.name)
    if m:
        return int(m.group(1))
    raise CorpusParseError("cannot determine topic id from path", str(path))


def _load_validated_sentences(source: Path) -> set[tuple[int, str, int]] | None:
    csv_path = source / VALIDATED_SENTENCES_CSV
    if not csv_path.exists():
        return None
    allowed: set[tuple[int, str, int]] = set()
    with csv_path.open(newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip().isdigit():
                continue  # header or blank
            topic, doc, sent = row[0].strip(), row[1].strip(), row[2].strip()
            doc = doc.removesuffix(".xml")
            allowed.add((int(topic), doc, int(sent)))
    return allowed


def _parse_document_file(path: Path, declared_topics: set[int], dev_topics: Iterable[int]):
    topic_id = _topic_of(path)
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as e:
        raise CorpusParseError(f"not well-formed XML: {e}", str(path), e.position[0])

    doc_id = (root.get("doc_name") or path.name).removesuffix(".xml")

    # tokens grouped per sentence, ordered by in-sentence number
    sentences: dict[int, list[tuple[int, str]]] = {}
    token_info: dict[int, tuple[int, int, str]] = {}  # t_id -> (sentence, number, text)
    for token in root.iter("token"):
        try:
            t_id = int(token.get("t_id", ""))
            sent = int(token.get("sentence", ""))
            number = int(token.get("number", ""))
        except ValueError:
            raise CorpusParseError(f"token with bad attributes: {token.attrib}", str(path))
        text = (token.text or "").strip()
        if not text:
            continue
        sentences.setdefault(sent, []).append((number, text))
        token_info[t_id] = (sent, number, text)

    sent_ids = sorted(sentences)
    sent_texts: dict[int, str] = {}
    token_offsets: dict[int, tuple[int, int]] = {}  # t_id -> (start, end) in its sentence
    for sid in sent_ids:
        toks = sorted(sentences[sid])
        text_parts: list[str] = []
        offsets_by_number: dict[int, tuple[int, int]] = {}
        pos = 0
        for number, text in toks:
            offsets_by_number[number] = (pos, pos + len(text))
            text_parts.append(text)
            pos += len(text) + 1
        sent_texts[sid] = " ".join(text_parts)
        for t_id, (s, number, _) in token_info.items():
            if s == sid:
                token_offsets[t_id] = offsets_by_number[number]

    # sentence_idx is the position in document order, zero-based
    sent_index = {sid: i for i, sid in enumerate(sent_ids)}
    doc = Document(doc_id, topic_id, tuple(sent_texts[sid] for sid in sent_ids))

    # markable id -> anchored token ids, plus coreference cluster notes
    markables: dict[int, list[int]] = {}
    cluster_of: dict[int, str] = {}
    markables_el = root.find("Markables")
    if markables_el is not None:
        for el in markables_el:
            if not _EVENT_TAG_RE.search(el.tag):
                continue
            anchors = [int(a.get("t_id", "0")) for a in el.findall("token_anchor")]
            if not anchors:
                continue  # cluster-head markable, no surface tokens
            m_id = int(el.get("m_id", "0"))
            markables[m_id] = anchors
    relations_el = root.find("Relations")
    if relations_el is not None:
        for rel in relations_el:
            note = rel.get("note")
            if not note:
                continue
            for src in rel.findall("source"):
                cluster_of[int(src.get("m_id", "0"))] = note

    split = assign_split(topic_id, dev_topics, declared_topics)
    mentions = []
    for m_id, anchors in sorted(markables.items()):
        missing = [t for t in anchors if t not in token_info]
        if missing:
            raise DanglingMarkable(
                f"markable m_id={m_id} references missing token t_id={missing[0]}", str(path)
            )
        sids = {token_info[t][0] for t in anchors}
        if len(sids) > 1:
            raise CorpusParseError(f"markable m_id={m_id} spans multiple sentences", str(path))
        sid = sids.pop()
        start = min(token_offsets[t][0] for t in anchors)
        end = max(token_offsets[t][1] for t in anchors)
        sentence_text = sent_texts[sid]
        idx = sent_index[sid]
        mentions.append(
            Mention(
                mention_id=f"{doc_id}:m{m_id}",
                topic_id=topic_id,
                doc_id=doc_id,
                sentence_idx=idx,
                doc_text=doc.text,
                sentence_text=sentence_text,
                trigger_start=start,
                trigger_end=end,
                trigger_lemma=lemma_fallback(sentence_text[start:end]),
                split=split,
                sentence_offset=doc.sentence_offset(idx),
                gold_cluster_id=cluster_of.get(m_id),
            )
        )
    return doc, mentions, sent_ids


def ingest_corpus(source: str | Path, dev_topics: Iterable[int] = DEFAULT_DEV_TOPICS) -> Corpus:
    """Ingest every document XML under ``source`` (recursively) into a Corpus."""
    source = Path(source)
    paths = sorted(p for p in source.rglob("*.xml") if p.is_file())
    declared = set()
    for p in paths:
        try:
            declared.add(_topic_of(p))
        except CorpusParseError:
            pass
    validated = _load_validated_sentences(source)

    documents: list[Document] = []
    mentions: list[Mention] = []
    for path in paths:
        doc, doc_mentions, sent_ids = _parse_document_file(path, declared, dev_topics)
        documents.append(doc)
        if validated is not None:
            doc_mentions = [
                m
                for m in doc_mentions
                if (m.topic_id, m.doc_id, sent_ids[m.sentence_idx]) in validated
            ]
        mentions.extend(doc_mentions)
    corpus = Corpus(documents, mentions, frozenset(dev_topics)).normalized()
    corpus.validate()
    return corpus


# -- serialization ------------------------------------------------------------

def mention_to_dict(m: Mention) -> dict:
    return {
        "mention_id": m.mention_id,
        "topic_id": m.topic_id,
        "doc_id": m.doc_id,
        "sentence_idx": m.sentence_idx,
        "doc_text": m.doc_text,
        "sentence_text": m.sentence_text,
        "trigger_start": m.trigger_start,
        "trigger_end": m.trigger_end,
        "trigger_lemma": m.trigger_lemma,
        "split": m.split,
        "sentence_offset": m.sentence_offset,
        "gold_cluster_id": m.gold_cluster_id,
    }


def mention_from_dict(d: dict) -> Mention:
    return Mention(**d)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    corpus = corpus.normalized()
    payload = {
        "dev_topics": sorted(corpus.dev_topics),
        "documents": [
            {"doc_id": d.doc_id, "topic_id": d.topic_id, "sentences": list(d.sentences)}
            for d in corpus.documents
        ],
        "mentions": [mention_to_dict(m) for m in corpus.mentions],
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=1), encoding="utf-8")


def load_corpus(path: str | Path) -> Corpus:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    corpus = Corpus(
        documents=[
            Document(d["doc_id"], d["topic_id"], tuple(d["sentences"]))
            for d in payload["documents"]
        ],
        mentions=[mention_from_dict(d) for d in payload["mentions"]],
        dev_topics=frozenset(payload["dev_topics"]),
    ).normalized()
    corpus.validate()
    return corpus


def save_manifest(mentions: Iterable[Mention], path: str | Path) -> int:
    n = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for m in mentions:
            fh.write(json.dumps(mention_to_dict(m), ensure_ascii=False) + "\n")
            n += 1
    return n


def load_manifest(path: str | Path) -> list[Mention]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(mention_from_dict(json.loads(line)))
    return out
