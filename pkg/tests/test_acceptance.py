"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``. The two data-contingent
checks skip (not fail) unless XAMR_ECB_DIR / XAMR_DEV_ANNOTATIONS point at
the released corpus and annotation files.
"""

import json
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ts
from llm_mocks import ScriptedClient, build_batch
from test_service import make_state
from xamr.annotations import EntityRef, load_annotations, parse_time, save_annotations, TimeRef
from xamr.corpus import ingest_corpus, load_corpus, save_corpus
from xamr.embedding import cosine, embed
from xamr.frames import parse_roleset_id
from xamr.metrics import acceptance_ratios, cohens_kappa, gpt_accuracy, raw_agreement
from xamr.pipeline import parse_response_a, run_pipeline
from xamr.service import create_app
from xamr.store import (
    ArgumentStore,
    Decision,
    DecisionAction,
    Slot,
    apply_decision,
    default_selection,
    load_decisions,
    rank,
    replay,
    store_add,
    value_sort_key,
)

GOLDEN = Path(__file__).parent / "fixtures" / "golden"

rs = parse_roleset_id


def report(name):
    print(f"\nACCEPTANCE [{name}]: PASS")


# -- corpus contract -----------------------------------------------------------

def test_corpus_contract(corpus_dir, tmp_path):
    started = time.monotonic()
    corpus = ingest_corpus(corpus_dir)
    assert len(corpus.mentions) == 12
    assert all(m.split == "test" for m in corpus.mentions if m.topic_id == 36)
    assert all(m.split == "train" for m in corpus.mentions if m.topic_id == 1)

    path = tmp_path / "corpus.json"
    save_corpus(corpus, path)
    assert load_corpus(path).normalized() == corpus.normalized()
    elapsed = time.monotonic() - started
    assert elapsed < 1.0, f"corpus contract took {elapsed:.2f}s"
    report("corpus contract")


# -- data-contingent (skip when data absent) -------------------------------------

def test_ecb_corpus_counts():
    data_dir = os.environ.get("XAMR_ECB_DIR")
    if not data_dir:
        pytest.skip("XAMR_ECB_DIR not set; full-corpus check skipped")
    from xamr.corpus import assign_split

    corpus = ingest_corpus(data_dir)
    docs = {"train": 0, "dev": 0, "test": 0}
    for doc in corpus.documents:
        docs[assign_split(doc.topic_id, corpus.dev_topics, {doc.topic_id})] += 1
    mentions = {"train": 0, "dev": 0, "test": 0}
    for m in corpus.mentions:
        mentions[m.split] += 1
    assert (docs["train"], docs["dev"], docs["test"]) == (594, 196, 206)
    assert (mentions["train"], mentions["dev"], mentions["test"]) == (3808, 1245, 1780)
    report("full corpus counts")


def test_released_dev_annotation_stats():
    data_dir = os.environ.get("XAMR_ECB_DIR")
    annotations_path = os.environ.get("XAMR_DEV_ANNOTATIONS")
    if not data_dir or not annotations_path:
        pytest.skip("XAMR_ECB_DIR/XAMR_DEV_ANNOTATIONS not set; dev-column check skipped")
    from xamr.metrics import corpus_stats

    corpus = ingest_corpus(data_dir)
    annotations = load_annotations(annotations_path)
    dev = corpus_stats(corpus, annotations).splits["dev"]
    assert dev.mentions == 1245
    assert dev.w_nested_arg1 == 325
    assert dev.w_arg_loc == 1243
    assert dev.w_arg_time == 1244
    report("released dev annotation stats")


# -- ranker oracle ----------------------------------------------------------------

def _brute_force(store, slot, target, topic_id, k):
    rows = []
    for e in store.entries(slot, topic_id):
        score = max(cosine(target, emb) for emb in e.embeddings)
        rows.append((score, e.ordinal, value_sort_key(e.slot, e.value), e.value))
    rows.sort(key=lambda r: (-r[0], r[1], r[2]))
    return [(r[3], r[0]) for r in rows[:k]]


def test_ranker_matches_oracle_200_stores():
    started = time.monotonic()
    rng = random.Random(20240101)
    vocab = (
        "merger quake storm deal buyout tremor flood signing market aftershock "
        "talks acquisition warning damage purchase award ceremony verdict launch strike"
    ).split()

    for trial in range(200):
        if trial % 40 == 0:
            size = rng.randint(500, 1000)  # a few large stores, up to the 1000 bound
        else:
            size = rng.randint(0, 60)
        store = ArgumentStore()
        for i in range(size):
            sentence = " ".join(rng.choices(vocab, k=rng.randint(1, 8)))
            surface = f"{rng.choice(vocab)} {rng.randint(0, size // 2 + 1)}"
            store_add(store, Slot.ARG0, EntityRef(surface), embed(sentence), f"m{i}", 1)
        target = embed(" ".join(rng.choices(vocab, k=4)))
        k = rng.choice([1, 3, 10, 1000])
        got = [(s.value, s.score) for s in rank(store, Slot.ARG0, target, 1, k=k)]
        assert got == _brute_force(store, Slot.ARG0, target, 1, k)

    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"ranker oracle took {elapsed:.1f}s"
    report(f"ranker oracle (200 stores, {elapsed:.1f}s)")


def test_embed_unit_norm_and_cross_process_determinism():
    probes = ["HP acquired EYP", "quarterly weather report", "", "7/08 acquisition"]
    for text in probes:
        norm = np.linalg.norm(embed(text))
        assert norm == 0.0 or abs(norm - 1.0) < 1e-12

    code = (
        "from xamr.embedding import embed; import hashlib; "
        "print(hashlib.sha256(b''.join(embed(t).tobytes() for t in "
        f"{probes!r})).hexdigest())"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, check=True
    ).stdout.strip()
    import hashlib

    local = hashlib.sha256(b"".join(embed(t).tobytes() for t in probes)).hexdigest()
    assert out == local
    report("embedding unit norm + cross-process determinism")


# -- decision semantics --------------------------------------------------------------

def test_accept_preserves_value_set_over_random_sequences():
    rng = random.Random(7)
    mentions = build_batch(20)
    store = ArgumentStore()
    for step in range(300):
        m = rng.choice(mentions)
        emb = embed(m.sentence_text)
        suggestions = rank(store, Slot.ARG0, emb, m.topic_id)
        before = sorted(
            value_sort_key(Slot.ARG0, e.value) for e in store.entries(Slot.ARG0, m.topic_id)
        )
        if suggestions and rng.random() < 0.5:
            top = default_selection(suggestions)
            d = Decision(m.mention_id, Slot.ARG0, top, DecisionAction.ACCEPT, top, "a1", ts(step % 60))
            apply_decision(store, d, emb, m.topic_id)
            after = sorted(
                value_sort_key(Slot.ARG0, e.value) for e in store.entries(Slot.ARG0, m.topic_id)
            )
            assert after == before, "ACCEPT changed the value set"
        else:
            d = Decision(
                m.mention_id, Slot.ARG0, default_selection(suggestions),
                DecisionAction.REJECT_CREATE, EntityRef(f"entity {rng.randint(0, 30)}"), "a1",
                ts(step % 60),
            )
            apply_decision(store, d, emb, m.topic_id)
    report("ACCEPT preserves value set (300 random decisions)")


def _random_session(client, state, seed):
    """Scripted session making randomized accept/modify/reject choices."""
    rng = random.Random(seed)
    rolesets = ["agree.01", "acquire.01", "strike.01", "report.01"]
    while True:
        response = client.get("/api/session/next", params={"annotator": "a1"})
        if response.status_code == 204:
            return
        view = response.json()
        for slot in view["slots"]:
            default = view["defaults"].get(slot)
            fresh = {
                "ROLESET": rng.choice(rolesets),
                "ARG0": {"kind": "entity", "surface": f"actor {rng.randint(0, 9)}", "wiki": None},
                "ARG1": {"kind": "entity", "surface": f"theme {rng.randint(0, 9)}", "wiki": None},
                "LOC": {"kind": "entity", "surface": f"place {rng.randint(0, 9)}", "wiki": None},
                "TIME": f"{rng.randint(1, 12):02d}-XX-2008",
            }[slot]
            if default is not None and rng.random() < 0.5:
                action, final = "ACCEPT", default
            elif default is not None and rng.random() < 0.5:
                action, final = "MODIFY", fresh
            else:
                action, final = "REJECT_CREATE", fresh
            body = {
                "mention_id": view["mention"]["mention_id"],
                "slot": slot,
                "annotator": "a1",
                "suggested": default,
                "action": action,
                "final": final,
            }
            assert client.post("/api/decision", json=body).status_code == 201


def test_replay_and_restart_reproduce_state(tmp_path, corpus_dir, frames_dir):
    state = make_state(tmp_path, corpus_dir, frames_dir)
    client = TestClient(create_app(state))
    _random_session(client, state, seed=11)

    log = load_decisions(tmp_path / "decisions.jsonl")
    assert log, "session recorded no decisions"
    rebuilt = replay(log, state.mentions)
    assert rebuilt.snapshot() == state.store.snapshot(), "replay differs from live store"

    reborn = make_state(tmp_path, corpus_dir, frames_dir)
    assert reborn.store.snapshot() == state.store.snapshot(), "restart differs from live store"
    assert reborn.version == state.version
    report(f"replay + kill/restart reproduce state ({len(log)} decisions)")


# -- prompt fidelity ------------------------------------------------------------------

def test_prompt_golden_files(corpus):
    from xamr.prompts import build_prompt_a, build_prompt_b

    mention = corpus.mention("1_1ecb:m2")
    rendered_a = build_prompt_a(mention).render()
    assert rendered_a == (GOLDEN / "prompt_a.txt").read_text(encoding="utf-8")

    target = (
        "HP (/wiki/Hewlett-Packard) signed an agreement (agree.01) to acquire "
        "EYP Mission Critical Facilities on 11-12-2007."
    )
    candidates = [
        "On 11-12-2007, HP (/wiki/Hewlett-Packard) agreed to acquire EYP Mission "
        "Critical Facilities (/wiki/EYP_Mission_Critical_Facilities).",
        "EYP Mission Critical Facilities was acquired by Hewlett Packard in 2007.",
    ]
    rendered_b = build_prompt_b(mention, target, candidates).render()
    assert rendered_b == (GOLDEN / "prompt_b.txt").read_text(encoding="utf-8")

    assert "You are a concise annotator" in rendered_a
    assert "/wiki/Wikipedia_ID" in rendered_a
    assert "three most informative and similar events" in rendered_b
    report("prompt golden files + spot checks")


def test_response_roundtrip():
    from xamr.pipeline import LlmResponseA

    resp = LlmResponseA(
        roleset_id="agree.01",
        arg0="HP",
        arg0_coref="/wiki/Hewlett-Packard",
        arg1="acquire EYP",
        arg1_coref="/wiki/EYP",
        arg1_roleset_id="acquire.01",
        arg_location="/wiki/Palo_Alto",
        arg_time=parse_time("11-12-2007").time,
        event_description="On 11-12-2007, HP agreed to acquire EYP.",
    )
    assert parse_response_a(resp.render()) == resp
    report("response parse round-trip")


def test_mock_pipeline_120_mentions(tmp_path):
    mentions = build_batch(120)
    cache = tmp_path / "cache"

    first = run_pipeline(mentions, ScriptedClient(), cache_dir=cache)
    assert len(first.annotations) == 120
    assert not first.failures
    assert first.client_calls == 240, "expected exactly 2 calls per mention"

    out1 = tmp_path / "run1.jsonl"
    save_annotations(first.annotations, out1)

    second = run_pipeline(mentions, ScriptedClient(), cache_dir=tmp_path / "cache2")
    out2 = tmp_path / "run2.jsonl"
    save_annotations(second.annotations, out2)
    assert out1.read_bytes() == out2.read_bytes(), "pipeline output not byte-deterministic"

    warm = run_pipeline(mentions, ScriptedClient(), cache_dir=cache)
    assert warm.client_calls == 0, "warm cache still issued client calls"
    out3 = tmp_path / "run3.jsonl"
    save_annotations(warm.annotations, out3)
    assert out3.read_bytes() == out1.read_bytes()
    report("mock pipeline: 120 mentions, 240 cold calls, 0 warm, byte-deterministic")


# -- metrics ---------------------------------------------------------------------------

def test_kappa_crafted_confusion():
    a, b = {}, {}
    idx = 0
    for label_a, label_b, n in (("x", "x", 50), ("x", "y", 10), ("y", "x", 10), ("y", "y", 30)):
        for _ in range(n):
            a[f"m{idx}"] = label_a
            b[f"m{idx}"] = label_b
            idx += 1
    kappa = cohens_kappa(a, b)
    assert abs(kappa - 0.5833) <= 1e-4, kappa
    assert abs(cohens_kappa(b, a) - kappa) <= 1e-12, "kappa not symmetric"
    report(f"kappa on crafted confusion = {kappa:.4f}")


def test_metrics_hand_counts_and_bounds():
    a = {f"m{i}": "same" for i in range(100)}
    b = dict(a)
    for i in range(9):
        b[f"m{i}"] = f"diff{i}"
    assert raw_agreement(a, b) == pytest.approx(0.91)
    assert raw_agreement(b, a) == raw_agreement(a, b)

    from xamr.annotations import XAmr

    pred = [
        XAmr(f"m{i}", rs("agree.01" if i < 7 else "strike.01"), arg0=EntityRef("HP"), annotator_id="gpt")
        for i in range(10)
    ]
    gold = [XAmr(f"m{i}", rs("agree.01"), arg0=EntityRef("hp"), annotator_id="adj") for i in range(10)]
    accuracy = gpt_accuracy(pred, gold).accuracy
    assert accuracy["roleset"] == pytest.approx(0.7)
    assert accuracy["ARG-0"] == pytest.approx(1.0)
    assert all(0.0 <= v <= 1.0 for v in accuracy.values())

    hp = EntityRef("HP")
    decisions = [
        Decision(f"m{i}", Slot.ARG0, hp, DecisionAction.ACCEPT, hp, "a1", ts(i)) for i in range(8)
    ] + [
        Decision("m8", Slot.ARG0, hp, DecisionAction.MODIFY, EntityRef("X"), "a1", ts(8)),
        Decision("m9", Slot.ARG0, hp, DecisionAction.REJECT_CREATE, EntityRef("Y"), "a1", ts(9)),
    ]
    for cell in acceptance_ratios(decisions).cells.values():
        if cell.total:
            assert all(0.0 <= r <= 1.0 for r in cell.rates)
            assert sum(cell.rates) == pytest.approx(1.0)
    report("metrics hand counts, bounds, symmetry")


# -- time parsing ------------------------------------------------------------------------

def test_paper_time_strings():
    assert parse_time("July 1st, 2008").time.canonical() == "07-01-2008"
    assert parse_time("7/08").time.canonical() == "07-XX-2008"
    report("paper time strings")


@settings(max_examples=300, deadline=None)
@given(
    st.one_of(st.none(), st.integers(1, 12)),
    st.booleans(),
    st.one_of(st.none(), st.integers(1, 31)),
    st.one_of(st.none(), st.integers(1000, 9999)),
)
def test_time_roundtrip_randomized(month, force_month, day, year):
    if day is not None and month is None:
        if not force_month:
            day = None
        else:
            month = ((day - 1) % 12) + 1
    t = TimeRef(month, day, year)
    parsed = parse_time(t.canonical())
    assert parsed.recognized
    assert parsed.time == t


def test_time_roundtrip_report():
    report("time canonical round-trip (300 randomized cases)")
