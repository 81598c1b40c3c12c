import json
import threading

import pytest
from fastapi.testclient import TestClient

from xamr.config import ServiceConfig
from xamr.corpus import ingest_corpus
from xamr.frames import load_frames
from xamr.metrics import acceptance_ratios
from xamr.service import ServiceState, create_app
from xamr.store import load_decisions, replay


def make_state(tmp_path, corpus_dir, frames_dir, **overrides) -> ServiceState:
    config = ServiceConfig(
        corpus_path=str(corpus_dir),
        frames_path=str(frames_dir),
        decision_log=str(tmp_path / "decisions.jsonl"),
        annotators=overrides.pop("annotators", ["a1"]),
        **overrides,
    )
    return ServiceState(ingest_corpus(corpus_dir), load_frames(frames_dir), config)


@pytest.fixture()
def state(tmp_path, corpus_dir, frames_dir):
    return make_state(tmp_path, corpus_dir, frames_dir)


@pytest.fixture()
def client(state):
    return TestClient(create_app(state))


def accept_or_create(client, view, slot, create_value):
    """Submit the served default when present, else create a value."""
    default = view["defaults"].get(slot)
    body = {
        "mention_id": view["mention"]["mention_id"],
        "slot": slot,
        "annotator": "a1",
        "suggested": default,
        "action": "ACCEPT" if default is not None else "REJECT_CREATE",
        "final": default if default is not None else create_value,
    }
    response = client.post("/api/decision", json=body)
    assert response.status_code == 201, response.text
    return response.json()["store_version"]


def run_full_session(client, annotator="a1"):
    """Phase 1 then phase 2 for every pending mention, accepting defaults."""
    rolesets = ["agree.01", "acquire.01", "strike.01"]
    step = 0
    while True:
        response = client.get("/api/session/next", params={"annotator": annotator})
        if response.status_code == 204:
            break
        view = response.json()
        step += 1
        assert step < 500, "session did not terminate"
        for slot in view["slots"]:
            create_value = {
                "ROLESET": rolesets[step % len(rolesets)],
                "ARG0": {"kind": "entity", "surface": f"actor {step}", "wiki": None},
                "ARG1": {"kind": "entity", "surface": f"theme {step}", "wiki": None},
                "LOC": {"kind": "entity", "surface": f"place {step}", "wiki": None},
                "TIME": "07-01-2008",
            }[slot]
            accept_or_create(client, view, slot, create_value)
    return step


class TestQueue:
    def test_healthz(self, client):
        body = client.get("/healthz").json()
        assert body["status"] == "ok" and body["mentions"] == 12

    def test_phase_1_serves_roleset_only(self, client):
        view = client.get("/api/session/next", params={"annotator": "a1"}).json()
        assert view["phase"] == 1
        assert view["slots"] == ["ROLESET"]
        assert set(view["suggestions"]) == {"ROLESET"}
        assert "**" in view["marked_sentence"]

    def test_unknown_annotator(self, client):
        assert client.get("/api/session/next", params={"annotator": "ghost"}).status_code == 400

    def test_phase_2_after_roleset_decided(self, client):
        view = client.get("/api/session/next", params={"annotator": "a1"}).json()
        mention_id = view["mention"]["mention_id"]
        accept_or_create(client, view, "ROLESET", "agree.01")
        # phase-complete mode: every other mention's roleset first
        seen_phase2 = False
        for _ in range(200):
            response = client.get("/api/session/next", params={"annotator": "a1"})
            if response.status_code == 204:
                break
            view = response.json()
            if view["phase"] == 2:
                seen_phase2 = True
                assert view["mention"]["mention_id"] == mention_id
                assert set(view["slots"]) == {"ARG0", "ARG1", "LOC", "TIME"}
                break
            accept_or_create(client, view, "ROLESET", "strike.01")
        assert seen_phase2

    def test_exhaustion_gives_204(self, client):
        run_full_session(client)
        assert client.get("/api/session/next", params={"annotator": "a1"}).status_code == 204

    def test_split_filter(self, client):
        response = client.get("/api/session/next", params={"annotator": "a1", "split": "test"})
        assert response.json()["mention"]["split"] == "test"

    def test_interleaved_mode(self, tmp_path, corpus_dir, frames_dir):
        state = make_state(tmp_path, corpus_dir, frames_dir, phase_mode="interleaved")
        client = TestClient(create_app(state))
        view = client.get("/api/session/next", params={"annotator": "a1"}).json()
        accept_or_create(client, view, "ROLESET", "agree.01")
        after = client.get("/api/session/next", params={"annotator": "a1"}).json()
        assert after["phase"] == 2
        assert after["mention"]["mention_id"] == view["mention"]["mention_id"]

    def test_double_assignment_routes_all(self, tmp_path, corpus_dir, frames_dir):
        state = make_state(tmp_path, corpus_dir, frames_dir, annotators=["a1", "a2"], assignment="double")
        assert len(state.assigned("a1", None)) == 12
        assert len(state.assigned("a2", None)) == 12

    def test_single_assignment_partitions(self, tmp_path, corpus_dir, frames_dir):
        state = make_state(tmp_path, corpus_dir, frames_dir, annotators=["a1", "a2"])
        ids_1 = {m.mention_id for m in state.assigned("a1", None)}
        ids_2 = {m.mention_id for m in state.assigned("a2", None)}
        assert not ids_1 & ids_2
        assert len(ids_1 | ids_2) == 12

    def test_shuffle_seed_deterministic(self, tmp_path, corpus_dir, frames_dir):
        a = make_state(tmp_path, corpus_dir, frames_dir, shuffle_seed=13)
        b = make_state(tmp_path, corpus_dir, frames_dir, shuffle_seed=13)
        assert [m.mention_id for m in a.mention_order] == [m.mention_id for m in b.mention_order]
        c = make_state(tmp_path, corpus_dir, frames_dir, shuffle_seed=14)
        assert [m.mention_id for m in a.mention_order] != [m.mention_id for m in c.mention_order]


class TestDecisionEndpoint:
    def test_accept_reinforces(self, client):
        view = client.get("/api/session/next", params={"annotator": "a1"}).json()
        accept_or_create(client, view, "ROLESET", "agree.01")
        # decide every remaining phase-1 mention, then check suggestions appear
        run_full_session(client)
        view2 = client.get("/api/session/next", params={"annotator": "a1"})
        assert view2.status_code == 204

    def test_invalid_accept(self, client):
        view = client.get("/api/session/next", params={"annotator": "a1"}).json()
        body = {
            "mention_id": view["mention"]["mention_id"],
            "slot": "ROLESET",
            "annotator": "a1",
            "suggested": "agree.01",
            "action": "ACCEPT",
            "final": "strike.01",
        }
        assert client.post("/api/decision", json=body).status_code == 422

    def test_duplicate_conflict(self, client):
        view = client.get("/api/session/next", params={"annotator": "a1"}).json()
        body = {
            "mention_id": view["mention"]["mention_id"],
            "slot": "ROLESET",
            "annotator": "a1",
            "suggested": None,
            "action": "REJECT_CREATE",
            "final": "agree.01",
        }
        assert client.post("/api/decision", json=body).status_code == 201
        assert client.post("/api/decision", json=body).status_code == 409

    def test_phase_order_enforced(self, client):
        view = client.get("/api/session/next", params={"annotator": "a1"}).json()
        body = {
            "mention_id": view["mention"]["mention_id"],
            "slot": "ARG0",
            "annotator": "a1",
            "suggested": None,
            "action": "REJECT_CREATE",
            "final": {"kind": "entity", "surface": "HP", "wiki": None},
        }
        assert client.post("/api/decision", json=body).status_code == 422

    def test_unknown_mention_404(self, client):
        body = {
            "mention_id": "nope:m1",
            "slot": "ROLESET",
            "annotator": "a1",
            "suggested": None,
            "action": "REJECT_CREATE",
            "final": "agree.01",
        }
        assert client.post("/api/decision", json=body).status_code == 404

    def test_unknown_annotator_400(self, client):
        body = {"mention_id": "1_1ecb:m1", "slot": "ROLESET", "annotator": "ghost",
                "suggested": None, "action": "REJECT_CREATE", "final": "agree.01"}
        assert client.post("/api/decision", json=body).status_code == 400

    def test_empty_final_allowed_for_args(self, client):
        view = client.get("/api/session/next", params={"annotator": "a1"}).json()
        mention_id = view["mention"]["mention_id"]
        accept_or_create(client, view, "ROLESET", "agree.01")
        body = {
            "mention_id": mention_id,
            "slot": "LOC",
            "annotator": "a1",
            "suggested": None,
            "action": "REJECT_CREATE",
            "final": None,
        }
        assert client.post("/api/decision", json=body).status_code == 201


class TestFramesEndpoints:
    def test_search(self, client):
        results = client.get("/api/frames/search", params={"q": "agree"}).json()
        assert results[0]["roleset_id"] == "agree.01"
        assert {"label": "ARG-0", "description": "Agreer"} in results[0]["roles"]

    def test_search_k(self, client):
        assert len(client.get("/api/frames/search", params={"q": "strike", "k": 1}).json()) == 1

    def test_get_known(self, client):
        body = client.get("/api/frames/agree.01").json()
        assert body["definition"] == "agree"

    def test_get_unknown_404(self, client):
        assert client.get("/api/frames/zzz.99").status_code == 404
        assert client.get("/api/frames/notanid").status_code == 404


class TestStatsAndExport:
    def test_fresh_zero(self, client):
        stats = client.get("/api/stats").json()
        assert stats["decisions"] == 0
        assert all(split["w_xamr"] == 0 for split in stats["corpus"].values())

    def test_matches_metrics_module(self, state, client):
        run_full_session(client)
        stats = client.get("/api/stats").json()
        expected = acceptance_ratios(state.decisions).to_json()
        assert stats["acceptance"] == json.loads(json.dumps(expected))
        assert stats["decisions"] == len(state.decisions)

    def test_export_jsonl(self, state, client):
        run_full_session(client)
        text = client.get("/api/annotations/export").text
        lines = [json.loads(line) for line in text.strip().splitlines()]
        assert len(lines) == 12
        assert set(lines[0]) == {"mention_id", "annotator", "roleset_id", "arg0", "arg1", "arg_loc", "arg_time"}

    def test_mention_endpoint(self, client):
        body = client.get("/api/mention/1_1ecb:m2").json()
        assert "**agreement**" in body["marked_sentence"]
        assert client.get("/api/mention/none:m9").status_code == 404


class TestStaticUi:
    def test_ui_dir_mounted_when_configured(self, tmp_path, corpus_dir, frames_dir):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>annotator ui</body></html>")
        state = make_state(tmp_path, corpus_dir, frames_dir, ui_dir=str(ui))
        client = TestClient(create_app(state))
        assert "annotator ui" in client.get("/").text
        assert client.get("/healthz").json()["status"] == "ok"

    def test_no_ui_dir_is_fine(self, client):
        assert client.get("/healthz").status_code == 200


class TestEventSourcing:
    def test_restart_replays_identically(self, tmp_path, corpus_dir, frames_dir):
        state = make_state(tmp_path, corpus_dir, frames_dir)
        client = TestClient(create_app(state))
        run_full_session(client)
        live_snapshot = state.store.snapshot()
        live_version = state.version

        reborn = make_state(tmp_path, corpus_dir, frames_dir)
        assert reborn.version == live_version
        assert reborn.store.snapshot() == live_snapshot

    def test_log_replay_equals_live_store(self, tmp_path, corpus_dir, frames_dir):
        state = make_state(tmp_path, corpus_dir, frames_dir)
        client = TestClient(create_app(state))
        run_full_session(client)
        log = load_decisions(tmp_path / "decisions.jsonl")
        rebuilt = replay(log, state.mentions)
        assert rebuilt.snapshot() == state.store.snapshot()

    def test_concurrent_reads_see_consistent_sums(self, tmp_path, corpus_dir, frames_dir):
        state = make_state(tmp_path, corpus_dir, frames_dir)
        client = TestClient(create_app(state))
        errors = []

        def writer():
            try:
                run_full_session(client)
            except Exception as e:  # noqa: BLE001
                errors.append(e)

        def reader():
            try:
                for _ in range(30):
                    stats = client.get("/api/stats").json()
                    for cell_group in stats["acceptance"].values():
                        for cell in cell_group.values():
                            assert cell["accepted"] + cell["modified"] + cell["rejected"] == cell["total"]
            except Exception as e:  # noqa: BLE001
                errors.append(e)

        threads = [threading.Thread(target=writer)] + [threading.Thread(target=reader) for _ in range(3)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
