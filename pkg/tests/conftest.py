"""Shared fixtures: engines built against a throwaway copy of the bundled
data directory so tests can mutate goal files freely.
"""

from __future__ import annotations

import dataclasses
import shutil
import time
from pathlib import Path

import pytest

from goalflow.config import load_config
from goalflow.engine import Engine, Session
from goalflow.llm import ProviderConfig

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture()
def work_data(tmp_path: Path) -> Path:
    """A disposable copy of the data directory."""
    target = tmp_path / "data"
    shutil.copytree(DATA_DIR, target)
    return target


def config_for(data_dir: Path, provider_kind: str = "scripted"):
    cfg = load_config(data_dir / "config.yaml")
    if provider_kind == "scripted":
        provider = ProviderConfig(kind="scripted", fixture_path=str(data_dir / "llm_fixture.json"))
    else:
        provider = ProviderConfig(kind="disabled")
    return dataclasses.replace(cfg, provider=provider, sessions_dir=data_dir.parent / "sessions")


@pytest.fixture()
def scripted_engine(work_data: Path) -> Engine:
    return Engine.from_config(config_for(work_data, "scripted"))


@pytest.fixture()
def offline_engine(work_data: Path) -> Engine:
    return Engine.from_config(config_for(work_data, "disabled"))


def make_session(session_id: str = "s1") -> Session:
    now = time.time()
    return Session(session_id=session_id, created_at=now, updated_at=now)


def run_turns(engine: Engine, session: Session, utterances: list[str]):
    return [engine.handle_turn(session, u) for u in utterances]
