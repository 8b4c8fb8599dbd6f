"""Application configuration loaded from YAML, with paths resolved
relative to the config file itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .llm import ProviderConfig
from .retriever import RetrieverConfig


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8077


@dataclass(frozen=True)
class AppConfig:
    root: Path
    goals_path: Path
    sessions_dir: Path
    kb_dir: Path | None = None
    operational_seed: Path | None = None
    keywords_path: Path | None = None
    templates_path: Path | None = None
    retriever: RetrieverConfig = field(default_factory=RetrieverConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    server: ServerConfig = field(default_factory=ServerConfig)


def _resolve(root: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else (root / path).resolve()


def load_config(path: Path | str) -> AppConfig:
    """Parse a YAML config file; relative paths resolve against its parent."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    root = path.resolve().parent

    goals_path = _resolve(root, raw.get("goals_path", "goals.yaml"))
    sessions_dir = _resolve(root, raw.get("sessions_dir", "sessions"))

    retr_raw = raw.get("retriever") or {}
    retr = RetrieverConfig(
        alpha=float(retr_raw.get("alpha", 0.5)),
        tau=float(retr_raw.get("tau", 0.45)),
        embedding_dim=int(retr_raw.get("embedding_dim", 256)),
    )

    prov_raw = raw.get("provider") or {}
    provider = ProviderConfig(
        kind=prov_raw.get("kind", "disabled"),
        base_url=prov_raw.get("base_url", ""),
        model=prov_raw.get("model", ""),
        timeout=float(prov_raw.get("timeout", 30.0)),
        max_retries=int(prov_raw.get("max_retries", 2)),
        api_key_env=prov_raw.get("api_key_env", "LLM_API_KEY"),
        fixture_path=prov_raw.get("fixture_path"),
        max_inflight=int(prov_raw.get("max_inflight", 4)),
    )

    srv_raw = raw.get("server") or {}
    server = ServerConfig(
        host=srv_raw.get("host", "127.0.0.1"),
        port=int(srv_raw.get("port", 8077)),
    )

    return AppConfig(
        root=root,
        goals_path=goals_path,
        sessions_dir=sessions_dir,
        kb_dir=_resolve(root, raw.get("kb_dir")),
        operational_seed=_resolve(root, raw.get("operational_seed")),
        keywords_path=_resolve(root, raw.get("keywords_path")),
        templates_path=_resolve(root, raw.get("templates_path")),
        retriever=retr,
        provider=provider,
        server=server,
    )
