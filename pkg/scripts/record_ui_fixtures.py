"""Regenerate the wire-format fixtures under frontend/tests/fixtures/.

Drives the HTTP app in-process through the scenario turns the browser
client's view tests rely on and freezes the exact JSON payloads. Review the
diff before committing a regeneration.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient  # noqa: E402

from goalflow.config import load_config  # noqa: E402
from goalflow.engine import Engine  # noqa: E402
from goalflow.llm import ProviderConfig  # noqa: E402
from goalflow.server import create_app  # noqa: E402
from goalflow.store import SessionStore  # noqa: E402

FIXTURE_DIR = ROOT / "frontend" / "tests" / "fixtures"


def build_client(tmp_sessions: Path) -> TestClient:
    cfg = load_config(ROOT / "data" / "config.yaml")
    cfg = dataclasses.replace(
        cfg,
        provider=ProviderConfig(
            kind="scripted", fixture_path=str(ROOT / "data" / "llm_fixture.json")
        ),
        sessions_dir=tmp_sessions,
    )
    engine = Engine.from_config(cfg)
    store = SessionStore(cfg.sessions_dir, lambda: engine.repo)
    return TestClient(create_app(engine, store))


def main() -> None:
    import tempfile

    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        client = build_client(Path(tmp))
        saved: dict[str, dict] = {}

        def send(sid: str, text: str) -> dict:
            response = client.post(f"/sessions/{sid}/messages", json={"text": text})
            response.raise_for_status()
            return response.json()

        def fresh() -> str:
            return client.post("/sessions").json()["session_id"]

        sid = fresh()
        saved["hygiene_overview"] = send(
            sid, "How to perform data hygiene to delete duplicate audience segments?"
        )
        saved["hygiene_step2"] = send(sid, "next")
        send(sid, "next")
        send(sid, "next")
        saved["hygiene_completed"] = send(sid, "done")

        sid = fresh()
        saved["subgoal_proposal"] = send(sid, "List the duplicate segments for me.")
        saved["subgoal_accepted"] = send(sid, "yes")

        sid = fresh()
        saved["ticket_start"] = send(sid, "I need to create a support ticket")
        send(sid, "Login page is broken")
        saved["ticket_midfill"] = send(
            sid, "I can't log in with my SSO account since this morning"
        )
        send(sid, "high")
        saved["ticket_complete"] = send(sid, "5551234567")

        sid = fresh()
        saved["qa_answer"] = send(sid, "How many datasets do I have?")
        saved["product_answer"] = send(sid, "What is a dataflow used for?")

        session_sid = fresh()
        send(session_sid, "I need to create a support ticket")
        send(session_sid, "Login page is broken")
        view = client.get(f"/sessions/{session_sid}")
        view.raise_for_status()
        saved["session_view_ticket"] = view.json()

    for name, payload in saved.items():
        path = FIXTURE_DIR / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
