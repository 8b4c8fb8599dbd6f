"""Tests for durable session storage and its per-session locking."""

from __future__ import annotations

import json

import pytest

from goalflow.dialogue import DialogueState, SubState
from goalflow.engine import Session, Turn
from goalflow.goals import GoalWorkflow, Repository, Step
from goalflow.store import SessionNotFound, SessionStore


@pytest.fixture()
def repo() -> Repository:
    workflow = GoalWorkflow(
        id="hygiene",
        goal="Perform data hygiene.",
        steps=(Step(0, "Scan", "Scan it."), Step(1, "Fix", "Fix it.")),
    )
    return Repository(workflows={workflow.id: workflow})


@pytest.fixture()
def store(tmp_path, repo: Repository) -> SessionStore:
    return SessionStore(tmp_path / "sessions", lambda: repo)


class TestCreateAndLoad:
    def test_create_persists_a_fresh_session(self, store: SessionStore) -> None:
        session = store.create()
        assert len(session.session_id) == 16
        assert session.turns == []
        assert session.state == DialogueState()
        assert store.exists(session.session_id)

        loaded = store.load(session.session_id)
        assert loaded.session_id == session.session_id
        assert loaded.created_at == session.created_at
        assert loaded.state == session.state

    def test_created_ids_are_distinct(self, store: SessionStore) -> None:
        ids = {store.create().session_id for _ in range(20)}
        assert len(ids) == 20

    def test_load_unknown_raises(self, store: SessionStore) -> None:
        with pytest.raises(SessionNotFound):
            store.load("feedfacecafebeef")

    def test_round_trip_keeps_turns_and_state(self, store: SessionStore) -> None:
        session = store.create()
        session.turns.append(Turn(0, "user", "hi", intent="goal_trigger", timestamp=1.5))
        session.turns.append(Turn(1, "assistant", "hello", action="clarify", timestamp=1.5))
        session.state = DialogueState(
            sub_state=SubState.EXECUTING_STEP,
            active_goal="hygiene",
            step_cursor=1,
            skipped_steps=frozenset({0}),
        )
        store.save(session)

        loaded = store.load(session.session_id)
        assert [t.to_dict() for t in loaded.turns] == [t.to_dict() for t in session.turns]
        assert loaded.state == session.state

    def test_save_then_save_overwrites(self, store: SessionStore) -> None:
        session = store.create()
        session.turns.append(Turn(0, "user", "first"))
        store.save(session)
        session.turns.append(Turn(1, "assistant", "second"))
        store.save(session)
        assert len(store.load(session.session_id).turns) == 2


class TestAtomicWrites:
    def test_no_temp_files_left_behind(self, store: SessionStore) -> None:
        for _ in range(5):
            store.save(store.create())
        stray = [p.name for p in store.directory.iterdir() if p.name.startswith(".tmp-")]
        assert stray == []

    def test_file_is_valid_json_with_expected_shape(self, store: SessionStore) -> None:
        session = store.create()
        data = json.loads((store.directory / f"{session.session_id}.json").read_text())
        assert set(data) == {"session_id", "created_at", "updated_at", "state", "turns"}
        assert data["state"]["sub_state"] == "awaiting_query"

    def test_failed_write_cleans_up_temp_file(self, store: SessionStore, monkeypatch) -> None:
        session = store.create()
        monkeypatch.setattr(
            "goalflow.store.os.replace",
            lambda *a: (_ for _ in ()).throw(OSError("disk full")),
        )
        with pytest.raises(OSError):
            store.save(session)
        monkeypatch.undo()
        stray = [p.name for p in store.directory.iterdir() if p.name.startswith(".tmp-")]
        assert stray == []
        # the original file is untouched
        assert store.load(session.session_id).session_id == session.session_id


class TestIdValidation:
    @pytest.mark.parametrize("bad", ["", "../escape", "a/b", "dot.dot", "..", "x.json"])
    def test_path_traversal_shapes_rejected(self, store: SessionStore, bad: str) -> None:
        with pytest.raises(SessionNotFound):
            store.load(bad)
        assert store.exists(bad) is False

    def test_save_rejects_bad_id_without_writing(self, store: SessionStore) -> None:
        with pytest.raises(SessionNotFound):
            store.save(Session(session_id="../oops", created_at=0.0, updated_at=0.0))
        assert list(store.directory.iterdir()) == []


class TestListing:
    def test_list_ids_sorted(self, store: SessionStore) -> None:
        created = sorted(store.create().session_id for _ in range(4))
        assert store.list_ids() == created

    def test_list_ignores_dotfiles(self, store: SessionStore) -> None:
        session = store.create()
        (store.directory / ".tmp-leftover.json").write_text("{}")
        assert store.list_ids() == [session.session_id]

    def test_empty_store_lists_nothing(self, store: SessionStore) -> None:
        assert store.list_ids() == []


class TestLocking:
    def test_acquire_release_cycle(self, store: SessionStore) -> None:
        assert store.try_acquire("s1") is True
        assert store.try_acquire("s1") is False
        store.release("s1")
        assert store.try_acquire("s1") is True
        store.release("s1")

    def test_locks_are_per_session(self, store: SessionStore) -> None:
        assert store.try_acquire("s1") is True
        assert store.try_acquire("s2") is True
        store.release("s1")
        store.release("s2")

    def test_release_without_acquire_is_harmless(self, store: SessionStore) -> None:
        store.release("never-held")
        assert store.try_acquire("never-held") is True
        store.release("never-held")


class TestDirectoryHandling:
    def test_directory_created_on_init(self, tmp_path, repo: Repository) -> None:
        target = tmp_path / "deep" / "nested" / "sessions"
        assert not target.exists()
        SessionStore(target, lambda: repo)
        assert target.is_dir()

    def test_two_stores_over_same_directory_share_files(self, tmp_path, repo: Repository) -> None:
        a = SessionStore(tmp_path / "s", lambda: repo)
        b = SessionStore(tmp_path / "s", lambda: repo)
        session = a.create()
        assert b.load(session.session_id).session_id == session.session_id
