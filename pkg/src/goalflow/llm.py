"""Model provider gateway.

Every model call in the engine goes through :class:`LLMGateway`, which
renders a named prompt template and hands it to the configured provider.
Three providers exist: ``http`` posts to a chat-completion endpoint,
``scripted`` replays canned responses from a fixture file (deterministic,
used by tests and offline demos), and ``disabled`` always raises so
callers exercise their rule-based fallbacks.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from . import prompts

logger = logging.getLogger(__name__)


class GatewayError(Exception):
    pass


class GatewayUnavailable(GatewayError):
    """No model response is possible; callers should fall back."""


class ProviderHTTPError(GatewayError):
    def __init__(self, status: int, detail: str = ""):
        self.status = status
        super().__init__(f"provider returned HTTP {status}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "disabled"  # http | scripted | disabled
    base_url: str = ""
    model: str = ""
    timeout: float = 30.0
    max_retries: int = 2
    api_key_env: str = "LLM_API_KEY"
    fixture_path: str | None = None
    max_inflight: int = 4


@dataclass(frozen=True)
class ScriptRule:
    """One fixture entry: response text gated on template name and substrings."""

    response: str
    template: str | None = None
    contains: tuple[str, ...] = ()

    def matches(self, prompt: str, template: str | None) -> bool:
        if self.template is not None and self.template != template:
            return False
        return all(sub in prompt for sub in self.contains)


class DisabledProvider:
    kind = "disabled"

    def complete(self, prompt: str, template: str | None = None) -> str:
        raise GatewayUnavailable("model provider is disabled")


class ScriptedProvider:
    """Replays fixture responses; first rule matching the prompt wins."""

    kind = "scripted"

    def __init__(self, rules: list[ScriptRule]):
        self.rules = list(rules)

    @classmethod
    def from_file(cls, path: Path | str) -> ScriptedProvider:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, list):
            raise GatewayError("scripted fixture must be a JSON list of rules")
        rules = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, dict) or "response" not in entry:
                raise GatewayError(f"fixture rule {i} must be an object with a `response` field")
            rules.append(
                ScriptRule(
                    response=str(entry["response"]),
                    template=entry.get("template"),
                    contains=tuple(str(s) for s in entry.get("contains", [])),
                )
            )
        return cls(rules)

    def complete(self, prompt: str, template: str | None = None) -> str:
        for rule in self.rules:
            if rule.matches(prompt, template):
                return rule.response
        raise GatewayUnavailable(f"no scripted rule matched template {template!r}")


class HTTPProvider:
    """Chat-completion client: {model, messages} in, first choice text out."""

    kind = "http"

    def __init__(self, config: ProviderConfig):
        if not config.base_url:
            raise GatewayError("http provider requires base_url")
        self.config = config
        self._gate = threading.BoundedSemaphore(max(1, config.max_inflight))

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, prompt: str, template: str | None = None) -> str:
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                time.sleep(0.5 * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    resp = requests.post(
                        self.config.base_url,
                        json=payload,
                        headers=self._headers(),
                        timeout=self.config.timeout,
                    )
            except requests.RequestException as exc:
                last_error = GatewayUnavailable(f"provider unreachable: {exc}")
                continue
            if resp.status_code >= 500:
                last_error = ProviderHTTPError(resp.status_code)
                continue
            if resp.status_code >= 400:
                raise ProviderHTTPError(resp.status_code, resp.text[:200])
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise GatewayError(f"malformed provider response: {exc}") from exc
        assert last_error is not None
        raise last_error


def build_provider(config: ProviderConfig, root: Path | None = None):
    """Construct the provider named by ``config.kind``."""
    if config.kind == "disabled":
        return DisabledProvider()
    if config.kind == "scripted":
        if not config.fixture_path:
            raise GatewayError("scripted provider requires fixture_path")
        path = Path(config.fixture_path)
        if root is not None and not path.is_absolute():
            path = root / path
        return ScriptedProvider.from_file(path)
    if config.kind == "http":
        return HTTPProvider(config)
    raise GatewayError(f"unknown provider kind: {config.kind!r}")


@dataclass
class LLMGateway:
    """Renders a named template and completes it with the provider."""

    provider: object = field(default_factory=DisabledProvider)

    @property
    def kind(self) -> str:
        return getattr(self.provider, "kind", "unknown")

    @property
    def enabled(self) -> bool:
        return self.kind != "disabled"

    def render(self, template_name: str, /, **bindings: str) -> str:
        return prompts.render(template_name, **bindings)

    def complete(self, template_name: str, /, **bindings: str) -> str:
        prompt = prompts.render(template_name, **bindings)
        text = self.provider.complete(prompt, template=template_name)
        logger.debug("gateway %s/%s -> %d chars", self.kind, template_name, len(text))
        return text
