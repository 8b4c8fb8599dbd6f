"""Regenerate the golden dialogue transcripts under tests/golden/.

Runs fixed utterance sequences through engines built from the bundled data
directory (scripted model replies or the offline fallbacks) and writes one
transcript per scenario. Review the diff before committing a regeneration;
the transcripts are the contract the engine tests hold the system to.
"""

from __future__ import annotations

import dataclasses
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from goalflow.config import load_config  # noqa: E402
from goalflow.engine import Engine, Session  # noqa: E402
from goalflow.llm import ProviderConfig  # noqa: E402

GOLDEN_DIR = ROOT / "tests" / "golden"

SCENARIOS: dict[str, tuple[str, list[str]]] = {
    "acceptance_walkthrough": (
        "scripted",
        [
            "How to perform data hygiene to delete duplicate audience segments?",
            "next",
            "okay",
            "next",
            "okay",
        ],
    ),
    "walkthrough": (
        "scripted",
        [
            "I want to clean up duplicate audience segments",
            "next",
            "How many datasets do I have?",
            "next",
            "step 4",
            "previous",
            "done",
            "goodbye",
        ],
    ),
    "subgoal_accept": (
        "scripted",
        [
            "List the duplicate segments for me.",
            "yes",
            "next",
            "next",
            "next",
        ],
    ),
    "subgoal_decline": (
        "scripted",
        [
            "List the duplicate segments for me.",
            "no",
        ],
    ),
    "ticket_scripted": (
        "scripted",
        [
            "I need to create a support ticket",
            "Login page is broken",
            "I can't log in with my SSO account since this morning",
            "high",
            "5551234567",
        ],
    ),
    "ticket_midqa_scripted": (
        "scripted",
        [
            "I need to create a support ticket",
            "Login page is broken",
            "I can't log in with my SSO account since this morning",
            "high",
            "How many datasets do I have?",
            "5551234567",
        ],
    ),
    "ticket_offline": (
        "disabled",
        [
            "I need to create a support ticket",
            "Login page is broken",
            "I can't log in with my SSO account since this morning",
            "high",
            "How many datasets do I have?",
            "5551234567",
        ],
    ),
    "qa_pending": (
        "disabled",
        [
            "How many datasets do I have?",
            "How many of my attributes have never been used?",
            "What is a dataflow used for?",
            "What's the weather like today?",
            "please reticulate the splines",
            "goodbye",
        ],
    ),
}


def build_engine(kind: str) -> Engine:
    cfg = load_config(ROOT / "data" / "config.yaml")
    if kind == "scripted":
        provider = ProviderConfig(kind="scripted", fixture_path=str(ROOT / "data" / "llm_fixture.json"))
    else:
        provider = ProviderConfig(kind="disabled")
    return Engine.from_config(dataclasses.replace(cfg, provider=provider))


def record(name: str, kind: str, utterances: list[str]) -> Path:
    engine = build_engine(kind)
    session = Session(session_id=name, created_at=time.time(), updated_at=time.time())
    blocks = []
    for utterance in utterances:
        result = engine.handle_turn(session, utterance)
        if result.error:
            raise RuntimeError(f"{name}: turn {utterance!r} errored")
        blocks.append(f">>> {utterance}\n{result.reply}")
    path = GOLDEN_DIR / f"{name}.txt"
    path.write_text("\n\n".join(blocks) + "\n", encoding="utf-8")
    return path


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    for name, (kind, utterances) in SCENARIOS.items():
        path = record(name, kind, utterances)
        print(f"wrote {path.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
