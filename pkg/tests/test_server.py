"""HTTP API tests: endpoint contracts, wire schema shape, durability of
sessions across a process restart, and concurrent writers on one session.
"""

from __future__ import annotations

import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from goalflow.engine import Engine
from goalflow.server import create_app
from goalflow.store import SessionStore

from tests.conftest import config_for

TURN_RESPONSE_KEYS = {
    "session_id",
    "turn_index",
    "reply",
    "intent",
    "action",
    "state",
    "belief",
    "step",
    "citations",
    "sql",
    "error",
}

STATE_KEYS = {
    "phase",
    "sub_state",
    "active_goal",
    "step_cursor",
    "skipped_steps",
    "proposed_goal",
    "proposed_step",
}


def create_app_pair(data_dir: Path, provider: str = "scripted"):
    cfg = config_for(data_dir, provider)
    engine = Engine.from_config(cfg)
    store = SessionStore(cfg.sessions_dir, lambda: engine.repo)
    client = TestClient(create_app(engine, store))
    return client, engine, store


@pytest.fixture()
def api(work_data: Path):
    return create_app_pair(work_data)


def start_session(client: TestClient) -> str:
    response = client.post("/sessions")
    assert response.status_code == 200
    return response.json()["session_id"]


def say(client: TestClient, session_id: str, text: str) -> dict:
    response = client.post(f"/sessions/{session_id}/messages", json={"text": text})
    assert response.status_code == 200, response.text
    return response.json()


class TestSessionLifecycle:
    def test_create_session_returns_pending_state(self, api) -> None:
        client, _, store = api
        response = client.post("/sessions")
        assert response.status_code == 200
        data = response.json()
        assert set(data) == {"session_id", "state"}
        assert data["state"]["sub_state"] == "awaiting_query"
        assert data["state"]["phase"] == "goal_pending"
        assert store.exists(data["session_id"])

    def test_get_session_reflects_turns(self, api) -> None:
        client, _, _ = api
        sid = start_session(client)
        say(client, sid, "I want to clean up duplicate audience segments")
        response = client.get(f"/sessions/{sid}")
        assert response.status_code == 200
        data = response.json()
        assert data["session_id"] == sid
        assert data["state"]["sub_state"] == "presenting_overview"
        assert len(data["turns"]) == 2
        assert data["turns"][0]["speaker"] == "user"
        assert data["turns"][1]["speaker"] == "assistant"
        assert data["step"]["number"] == 1
        assert data["belief"] is None

    def test_get_unknown_session_404(self, api) -> None:
        client, _, _ = api
        assert client.get("/sessions/doesnotexist00aa").status_code == 404

    def test_export_shape(self, api) -> None:
        client, _, _ = api
        sid = start_session(client)
        say(client, sid, "How many datasets do I have?")
        response = client.get(f"/sessions/{sid}/export")
        assert response.status_code == 200
        data = response.json()
        assert set(data) == {
            "session_id",
            "created_at",
            "updated_at",
            "turn_count",
            "state",
            "turns",
        }
        assert data["turn_count"] == 2
        assert data["turns"][0]["intent"] == "question"
        assert data["turns"][1]["action"] == "answer_question"

    def test_export_unknown_session_404(self, api) -> None:
        client, _, _ = api
        assert client.get("/sessions/ghost/export").status_code == 404


class TestMessages:
    def test_turn_response_schema_for_guidance_turn(self, api) -> None:
        client, _, _ = api
        sid = start_session(client)
        data = say(client, sid, "I want to clean up duplicate audience segments")

        assert set(data) == TURN_RESPONSE_KEYS
        assert set(data["state"]) == STATE_KEYS
        assert data["session_id"] == sid
        assert data["turn_index"] == 1
        assert data["error"] is False
        assert data["intent"]["label"] == "goal_trigger"
        assert data["action"]["kind"] == "present_overview"
        assert data["action"]["goal_id"] == "data-hygiene"
        assert data["state"]["sub_state"] == "presenting_overview"
        assert data["state"]["active_goal"] == "data-hygiene"
        assert data["belief"] is None
        assert data["citations"] is None
        assert data["sql"] is None

        step = data["step"]
        assert step["index"] == 0
        assert step["number"] == 1
        assert step["total"] == 4
        assert step["skipped"] == []
        assert len(step["steps"]) == 4
        assert step["steps"][0].startswith("Detect duplicate segments")

    def test_operational_question_carries_sql(self, api) -> None:
        client, _, _ = api
        sid = start_session(client)
        data = say(client, sid, "How many datasets do I have?")
        assert data["reply"].startswith("You have 12 datasets.")
        assert data["sql"] == {
            "text": "SELECT COUNT(*) FROM datasets",
            "explanation": "Counts every row in the datasets table.",
        }
        assert data["citations"] is None
        assert data["intent"]["label"] == "question"
        assert data["action"]["question_kind"] == "operational_insights"

    def test_product_question_carries_citations(self, work_data: Path) -> None:
        client, _, _ = create_app_pair(work_data, "disabled")
        sid = start_session(client)
        data = say(client, sid, "What is a dataflow used for?")
        assert data["citations"] == ["dataflows"]
        assert data["sql"] is None
        assert "Sources: dataflows" in data["reply"]

    def test_belief_view_during_collection(self, api) -> None:
        client, _, _ = api
        sid = start_session(client)
        data = say(client, sid, "I need to create a support ticket")
        belief = data["belief"]
        assert belief["workflow_id"] == "create-ticket"
        assert belief["complete"] is False
        assert belief["last_requested_slot"] == "ticket title"
        assert [s["name"] for s in belief["slots"]] == [
            "ticket title",
            "detailed ticket description",
            "priority",
            "phone number",
        ]
        assert all(s["filled"] is False for s in belief["slots"])

        data = say(client, sid, "Login page is broken")
        belief = data["belief"]
        assert belief["slots"][0]["filled"] is True
        assert belief["slots"][0]["value"] == "Login page is broken"
        assert belief["missing"] == ["detailed ticket description", "priority", "phone number"]

    def test_full_collection_marks_complete(self, api) -> None:
        client, _, _ = api
        sid = start_session(client)
        for text in (
            "I need to create a support ticket",
            "Login page is broken",
            "I can't log in with my SSO account since this morning",
            "high",
        ):
            say(client, sid, text)
        data = say(client, sid, "5551234567")
        assert data["belief"]["complete"] is True
        assert data["belief"]["missing"] == []
        assert data["state"]["sub_state"] == "completed"
        assert data["action"]["kind"] == "summarize_slots"

    def test_empty_text_400(self, api) -> None:
        client, _, _ = api
        sid = start_session(client)
        response = client.post(f"/sessions/{sid}/messages", json={"text": "   "})
        assert response.status_code == 400

    def test_unknown_session_404(self, api) -> None:
        client, _, _ = api
        response = client.post("/sessions/nosuchsession0ab/messages", json={"text": "hi"})
        assert response.status_code == 404

    def test_busy_session_409(self, api) -> None:
        client, _, store = api
        sid = start_session(client)
        assert store.try_acquire(sid)
        try:
            response = client.post(f"/sessions/{sid}/messages", json={"text": "hello"})
            assert response.status_code == 409
        finally:
            store.release(sid)
        # and the turn goes through once the lock is free
        assert say(client, sid, "How many datasets do I have?")["turn_index"] == 1

    def test_turn_persisted_before_response(self, api) -> None:
        client, _, store = api
        sid = start_session(client)
        say(client, sid, "I want to clean up duplicate audience segments")
        on_disk = store.load(sid)
        assert len(on_disk.turns) == 2
        assert on_disk.state.sub_state.value == "presenting_overview"

    def test_skipped_steps_surface_in_step_view(self, api) -> None:
        client, _, _ = api
        sid = start_session(client)
        say(client, sid, "List the duplicate segments for me.")
        data = say(client, sid, "yes")
        assert data["state"]["skipped_steps"] == [0]
        assert data["step"]["skipped"] == [0]
        assert data["step"]["number"] == 2


class TestGoalEndpoints:
    def test_list_goals(self, api) -> None:
        client, _, _ = api
        data = client.get("/goals").json()
        ids = [g["id"] for g in data["goals"]]
        assert ids == ["data-hygiene", "create-ticket"]
        assert data["goals"][0]["paradigm"] == "guidance"
        assert data["goals"][1]["paradigm"] == "slot_filling"

    def test_add_goal_yaml_list_form(self, api) -> None:
        client, engine, _ = api
        yaml_body = (
            "- id: rotate-keys\n"
            "  goal: Rotate the API keys.\n"
            "  steps:\n"
            "  - name: Generate a new key\n"
            "    description: Create a replacement key.\n"
            "  - name: Revoke the old key\n"
            "    description: Remove the previous key.\n"
        )
        response = client.post("/goals", content=yaml_body)
        assert response.status_code == 200
        data = response.json()
        assert data["added"] == ["rotate-keys"]
        assert data["goal_count"] == 3
        assert "rotate-keys" in engine.repo.workflows

        sid = start_session(client)
        turn = say(client, sid, "rotate the API keys")
        assert turn["action"]["kind"] == "present_overview"
        assert turn["state"]["active_goal"] == "rotate-keys"

    def test_add_goal_bare_mapping_form(self, api) -> None:
        client, _, _ = api
        yaml_body = (
            "id: export-data\n"
            "goal: Export the account data.\n"
            "steps:\n"
            "- name: Open the export page\n"
            "  description: Navigate to settings.\n"
        )
        response = client.post("/goals", content=yaml_body)
        assert response.status_code == 200
        assert response.json()["added"] == ["export-data"]

    def test_add_duplicate_goal_409(self, api) -> None:
        client, _, _ = api
        yaml_body = "- id: data-hygiene\n  goal: Something else.\n  steps:\n  - name: A\n    description: B.\n"
        assert client.post("/goals", content=yaml_body).status_code == 409

    def test_add_invalid_goal_422_with_violations(self, api) -> None:
        client, _, _ = api
        yaml_body = "- id: broken\n  goal: Has no steps or slots.\n"
        response = client.post("/goals", content=yaml_body)
        assert response.status_code == 422
        violations = response.json()["detail"]["violations"]
        assert violations
        assert {"code", "message", "path"} <= set(violations[0])

    def test_add_goal_bad_yaml_422(self, api) -> None:
        client, _, _ = api
        response = client.post("/goals", content=": not yaml [")
        assert response.status_code == 422

    def test_add_goal_wrong_shape_422(self, api) -> None:
        client, _, _ = api
        response = client.post("/goals", content="just a string")
        assert response.status_code == 422

    def test_translate_returns_yaml(self, api) -> None:
        client, _, _ = api
        from tests.test_nl2goal import PIPELINE_PARAGRAPH

        response = client.post("/goals/translate", content=PIPELINE_PARAGRAPH)
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/plain")
        body = response.text
        assert "workflow:" in body
        assert "Investigate the transformation logic." in body
        assert "Check for errors." in body

    def test_translate_empty_400(self, api) -> None:
        client, _, _ = api
        assert client.post("/goals/translate", content="   ").status_code == 400

    def test_translate_marker_free_text_still_yields_a_workflow(self, work_data: Path) -> None:
        client, _, _ = create_app_pair(work_data, "disabled")
        response = client.post("/goals/translate", content="Archive the stale exports.")
        assert response.status_code == 200
        assert "Archive the stale exports." in response.text

    def test_translate_unparseable_422(self, work_data: Path) -> None:
        client, _, _ = create_app_pair(work_data, "disabled")
        response = client.post("/goals/translate", content="???")
        assert response.status_code == 422


class TestKbEndpoints:
    def test_ingest_and_search(self, api) -> None:
        client, _, _ = api
        docs = [
            {
                "doc_id": "billing",
                "title": "Billing exports",
                "body": "A billing export is a monthly spreadsheet of usage charges.",
            }
        ]
        response = client.post("/kb/documents", json=docs)
        assert response.status_code == 200
        assert response.json() == {"ingested": 1, "kb_doc_count": 4}

        hits = client.get("/kb/search", params={"q": "billing export"}).json()["hits"]
        assert hits[0]["doc_id"] == "billing"
        assert set(hits[0]) == {"doc_id", "title", "score"}
        assert hits[0]["score"] > 0

    def test_ingest_duplicate_409(self, api) -> None:
        client, _, _ = api
        doc = {"doc_id": "dataflows", "title": "x", "body": "y"}
        assert client.post("/kb/documents", json=[doc]).status_code == 409

    def test_ingest_empty_body_422(self, api) -> None:
        client, _, _ = api
        doc = {"doc_id": "blank", "title": "x", "body": "   "}
        assert client.post("/kb/documents", json=[doc]).status_code == 422

    def test_search_empty_query_gives_no_hits(self, api) -> None:
        client, _, _ = api
        assert client.get("/kb/search", params={"q": ""}).json() == {"hits": []}

    def test_search_bundled_docs(self, api) -> None:
        client, _, _ = api
        hits = client.get("/kb/search", params={"q": "duplicate segments"}).json()["hits"]
        assert hits[0]["doc_id"] == "segments"


class TestHealth:
    def test_healthz_fields(self, api) -> None:
        client, _, _ = api
        data = client.get("/healthz").json()
        assert data == {
            "status": "ok",
            "goal_count": 2,
            "kb_doc_count": 3,
            "provider_kind": "scripted",
        }

    def test_cross_origin_requests_allowed(self, api) -> None:
        client, _, _ = api
        response = client.get("/healthz", headers={"Origin": "http://localhost:5500"})
        assert response.headers["access-control-allow-origin"] == "*"
        preflight = client.options(
            "/sessions",
            headers={
                "Origin": "http://localhost:5500",
                "Access-Control-Request-Method": "POST",
            },
        )
        assert preflight.status_code == 200
        assert "POST" in preflight.headers["access-control-allow-methods"]


class TestDurability:
    def test_sessions_survive_process_restart(self, work_data: Path) -> None:
        client, _, _ = create_app_pair(work_data)
        sid = start_session(client)
        for text in ("I want to clean up duplicate audience segments", "next", "next"):
            say(client, sid, text)

        # a fresh engine + store over the same directories sees the same session
        reborn, _, _ = create_app_pair(work_data)
        data = reborn.get(f"/sessions/{sid}").json()
        assert data["state"]["sub_state"] == "executing_step"
        assert data["state"]["step_cursor"] == 2
        assert len(data["turns"]) == 6

        resumed = say(reborn, sid, "done")
        assert resumed["state"]["sub_state"] == "completed"
        assert resumed["turn_index"] == 7

    def test_collection_belief_survives_restart(self, work_data: Path) -> None:
        client, _, _ = create_app_pair(work_data)
        sid = start_session(client)
        say(client, sid, "I need to create a support ticket")
        say(client, sid, "Login page is broken")

        reborn, _, _ = create_app_pair(work_data)
        data = reborn.get(f"/sessions/{sid}").json()
        assert data["belief"]["slots"][0]["value"] == "Login page is broken"
        assert data["belief"]["last_requested_slot"] == "detailed ticket description"

        resumed = say(reborn, sid, "I can't log in with my SSO account since this morning")
        assert resumed["belief"]["missing"] == ["priority", "phone number"]


class TestConcurrentWriters:
    def test_eight_writers_on_one_session_lose_no_turns(self, work_data: Path) -> None:
        client, _, store = create_app_pair(work_data)
        sid = start_session(client)

        writers = 8
        per_writer = 4
        barrier = threading.Barrier(writers)
        indices: list[int] = []
        busy_responses = 0
        failures: list[str] = []
        record = threading.Lock()

        def run() -> None:
            nonlocal busy_responses
            barrier.wait()
            for _ in range(per_writer):
                while True:
                    response = client.post(
                        f"/sessions/{sid}/messages",
                        json={"text": "How many datasets do I have?"},
                    )
                    if response.status_code == 409:
                        with record:
                            busy_responses += 1
                        continue
                    if response.status_code != 200:
                        with record:
                            failures.append(f"{response.status_code}: {response.text}")
                        return
                    with record:
                        indices.append(response.json()["turn_index"])
                    break

        threads = [threading.Thread(target=run) for _ in range(writers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert failures == []
        total = writers * per_writer
        assert len(indices) == total
        # every assistant turn landed exactly once: odd indices 1, 3, ..., 2n-1
        assert sorted(indices) == list(range(1, 2 * total, 2))

        exported = client.get(f"/sessions/{sid}/export").json()
        assert exported["turn_count"] == 2 * total
        on_disk = store.load(sid)
        assert [t.index for t in on_disk.turns] == list(range(2 * total))
