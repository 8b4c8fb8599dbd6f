"""Command-line interface: chat REPL, goal repository tools, offline or
gateway-backed goal translation, and the service launcher.

stdout carries data; stderr carries prompts and diagnostics.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import goals, nl2goal
from .config import ConfigError, load_config
from .engine import Engine, Session
from .goals import Repository, RepositoryError, SchemaError
from .store import SessionStore

CONFIG_HELP = "Path to the YAML config file."


def _load_config_or_die(config_path: str):
    try:
        return load_config(config_path)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _engine_or_die(config_path: str) -> Engine:
    cfg = _load_config_or_die(config_path)
    try:
        return Engine.from_config(cfg)
    except Exception as exc:
        click.echo(f"error: failed to start engine: {exc}", err=True)
        sys.exit(1)


@click.group()
@click.version_option(package_name="goalflow")
def main() -> None:
    """Goal-driven dialogue engine tools."""


# ----------------------------------------------------------------- chat


class _LocalChat:
    def __init__(self, engine: Engine, store: SessionStore, session: Session):
        self.engine = engine
        self.store = store
        self.session = session

    @property
    def session_id(self) -> str:
        return self.session.session_id

    def send(self, text: str) -> dict:
        result = self.engine.handle_turn(self.session, text)
        self.store.save(self.session)
        return {
            "reply": result.reply,
            "intent": result.intent.label.value if result.intent else None,
            "action": result.action.kind.value if result.action else None,
            "state": result.state.to_dict(),
        }

    def state(self) -> dict:
        return self.session.state.to_dict()


class _RemoteChat:
    def __init__(self, url: str, session_id: str | None):
        import requests

        self._requests = requests
        self.url = url.rstrip("/")
        if session_id is None:
            response = requests.post(f"{self.url}/sessions", timeout=30)
            response.raise_for_status()
            session_id = response.json()["session_id"]
        self.session_id = session_id

    def send(self, text: str) -> dict:
        response = self._requests.post(
            f"{self.url}/sessions/{self.session_id}/messages",
            json={"text": text},
            timeout=60,
        )
        response.raise_for_status()
        data = response.json()
        return {
            "reply": data["reply"],
            "intent": (data.get("intent") or {}).get("label"),
            "action": (data.get("action") or {}).get("kind"),
            "state": data.get("state"),
        }

    def state(self) -> dict:
        response = self._requests.get(f"{self.url}/sessions/{self.session_id}", timeout=30)
        response.raise_for_status()
        return response.json()["state"]


@main.command()
@click.option("--config", "config_path", envvar="GOALFLOW_CONFIG", default="data/config.yaml", show_default=True, help=CONFIG_HELP)
@click.option("--url", default=None, help="Chat against a running service instead of in-process.")
@click.option("--session", "session_id", default=None, help="Resume an existing session id.")
@click.option("--debug", is_flag=True, help="Emit one JSON diagnostic line per turn on stderr.")
def chat(config_path: str, url: str | None, session_id: str | None, debug: bool) -> None:
    """Interactive REPL. Lines starting with / are commands (/state, /exit)."""
    if url:
        try:
            backend = _RemoteChat(url, session_id)
        except Exception as exc:
            click.echo(f"error: cannot reach {url}: {exc}", err=True)
            sys.exit(2)
    else:
        cfg = _load_config_or_die(config_path)
        engine = Engine.from_config(cfg)
        store = SessionStore(cfg.sessions_dir, lambda: engine.repo)
        if session_id:
            try:
                session = store.load(session_id)
            except Exception as exc:
                click.echo(f"error: {exc}", err=True)
                sys.exit(1)
        else:
            session = store.create()
        backend = _LocalChat(engine, store, session)

    interactive = sys.stdin.isatty()
    if interactive:
        click.echo(f"session {backend.session_id} (type /exit to leave)", err=True)
    while True:
        if interactive:
            click.echo("> ", err=True, nl=False)
        line = sys.stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line:
            continue
        if line.startswith("/"):
            if line in ("/exit", "/quit"):
                break
            if line == "/state":
                click.echo(json.dumps(backend.state(), sort_keys=True))
            else:
                click.echo(f"unknown command: {line}", err=True)
            continue
        try:
            turn = backend.send(line)
        except Exception as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        click.echo(turn["reply"])
        if debug:
            click.echo(
                json.dumps(
                    {"intent": turn["intent"], "action": turn["action"], "state": turn["state"]},
                    sort_keys=True,
                ),
                err=True,
            )
        if turn["action"] == "farewell":
            break


# ---------------------------------------------------------------- goals


@main.group("goals")
def goals_group() -> None:
    """Goal repository tools."""


@goals_group.command("validate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def goals_validate(file: Path) -> None:
    """Exit 0 iff FILE parses and every workflow is valid."""
    try:
        repo = goals.parse_repository(file.read_text(encoding="utf-8"), source=file)
    except SchemaError as exc:
        for violation in exc.violations:
            where = f" at {violation.path}" if violation.path else ""
            click.echo(f"{violation.code}{where}: {violation.message}", err=True)
        sys.exit(1)
    except RepositoryError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"ok: {len(repo)} goal(s)")


@goals_group.command("list")
@click.option("--config", "config_path", envvar="GOALFLOW_CONFIG", default="data/config.yaml", show_default=True, help=CONFIG_HELP)
def goals_list(config_path: str) -> None:
    """List the goals the configured repository holds."""
    cfg = _load_config_or_die(config_path)
    try:
        repo = goals.load_repository(cfg.goals_path)
    except RepositoryError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for workflow in repo:
        shape = f"{len(workflow.steps)} steps" if workflow.steps else f"{len(workflow.slots)} slots"
        click.echo(f"{workflow.id}\t{workflow.paradigm.value}\t{shape}\t{workflow.goal}")


# -------------------------------------------------------------- nl2goal


@main.command("nl2goal")
@click.argument("textfile", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Write YAML here instead of stdout.")
@click.option("--offline", is_flag=True, help="Use the deterministic parser, never the gateway.")
@click.option("--config", "config_path", envvar="GOALFLOW_CONFIG", default="data/config.yaml", show_default=True, help=CONFIG_HELP)
def nl2goal_cmd(textfile: Path, output: Path | None, offline: bool, config_path: str) -> None:
    """Translate a natural-language goal description into workflow YAML."""
    text = textfile.read_text(encoding="utf-8").strip()
    if not text:
        click.echo("error: input file is empty", err=True)
        sys.exit(1)
    try:
        if offline:
            workflow = nl2goal.parse_enumeration(text)
        else:
            engine = _engine_or_die(config_path)
            workflow = engine.translate_goal(text)
    except (nl2goal.Nl2GoalError, RepositoryError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    yaml_text = goals.serialize_repository(Repository(workflows={workflow.id: workflow}))
    if output:
        output.write_text(yaml_text, encoding="utf-8")
        click.echo(f"wrote {output}", err=True)
    else:
        click.echo(yaml_text, nl=False)


# ---------------------------------------------------------------- serve


@main.command()
@click.option("--config", "config_path", envvar="GOALFLOW_CONFIG", default="data/config.yaml", show_default=True, help=CONFIG_HELP)
@click.option("--host", default=None, help="Override the configured listen host.")
@click.option("--port", type=int, default=None, help="Override the configured port.")
def serve(config_path: str, host: str | None, port: int | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .server import create_app

    cfg = _load_config_or_die(config_path)
    try:
        engine = Engine.from_config(cfg)
    except Exception as exc:
        click.echo(f"error: failed to start engine: {exc}", err=True)
        sys.exit(1)
    store = SessionStore(cfg.sessions_dir, lambda: engine.repo)
    app = create_app(engine, store)
    uvicorn.run(app, host=host or cfg.server.host, port=port or cfg.server.port, log_level="warning")


# ------------------------------------------------------------------- kb


@main.group("kb")
def kb_group() -> None:
    """Knowledge-base tools."""


@kb_group.command("search")
@click.argument("query")
@click.option("--config", "config_path", envvar="GOALFLOW_CONFIG", default="data/config.yaml", show_default=True, help=CONFIG_HELP)
def kb_search(query: str, config_path: str) -> None:
    """Rank KB documents against QUERY (debug retrieval)."""
    engine = _engine_or_die(config_path)
    from . import qa

    for doc, score in qa.search(engine.kb, query):
        click.echo(f"{score:.4f}\t{doc.doc_id}\t{doc.title}")


if __name__ == "__main__":
    main()
