"""Gateway and provider behavior, fully offline."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from goalflow.llm import (
    DisabledProvider,
    GatewayError,
    GatewayUnavailable,
    HTTPProvider,
    LLMGateway,
    ProviderConfig,
    ProviderHTTPError,
    ScriptedProvider,
    ScriptRule,
    build_provider,
)


class TestScripted:
    def test_first_matching_rule_wins(self):
        p = ScriptedProvider(
            [
                ScriptRule(response="one", contains=("alpha",)),
                ScriptRule(response="two", contains=("alpha", "beta")),
            ]
        )
        assert p.complete("alpha beta") == "one"

    def test_template_gate(self):
        p = ScriptedProvider([ScriptRule(response="r", template="dst")])
        assert p.complete("anything", template="dst") == "r"
        with pytest.raises(GatewayUnavailable):
            p.complete("anything", template="nl2goal")

    def test_no_match_raises_unavailable(self):
        p = ScriptedProvider([ScriptRule(response="r", contains=("nope",))])
        with pytest.raises(GatewayUnavailable):
            p.complete("other text")

    def test_deterministic(self):
        p = ScriptedProvider([ScriptRule(response="same", contains=())])
        assert p.complete("x") == p.complete("x") == "same"

    def test_from_file(self, tmp_path: Path):
        path = tmp_path / "rules.json"
        path.write_text(json.dumps([{"template": "dst", "contains": ["q"], "response": "{}"}]))
        p = ScriptedProvider.from_file(path)
        assert p.complete("the q here", template="dst") == "{}"

    def test_from_file_rejects_bad_shapes(self, tmp_path: Path):
        path = tmp_path / "rules.json"
        path.write_text(json.dumps({"not": "a list"}))
        with pytest.raises(GatewayError):
            ScriptedProvider.from_file(path)
        path.write_text(json.dumps([{"contains": []}]))
        with pytest.raises(GatewayError):
            ScriptedProvider.from_file(path)


class TestDisabled:
    def test_always_unavailable(self):
        with pytest.raises(GatewayUnavailable):
            DisabledProvider().complete("anything")


class TestGateway:
    def test_enabled_flag(self):
        assert not LLMGateway(DisabledProvider()).enabled
        assert LLMGateway(ScriptedProvider([])).enabled

    def test_complete_renders_then_calls(self):
        rule = ScriptRule(response="out", template="nl2goal", contains=("MY GOAL",))
        gw = LLMGateway(ScriptedProvider([rule]))
        assert gw.complete("nl2goal", new_goal="MY GOAL") == "out"

    def test_render_passthrough(self):
        gw = LLMGateway(DisabledProvider())
        text = gw.render("product_qa", passages="P", question="Q")
        assert "P" in text and "Q" in text


class TestHTTP:
    def test_requires_base_url(self):
        with pytest.raises(GatewayError):
            HTTPProvider(ProviderConfig(kind="http"))

    def test_success_and_auth_header(self, monkeypatch):
        seen = {}

        class FakeResponse:
            status_code = 200

            def json(self):
                return {"choices": [{"message": {"content": "hello"}}]}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen.update(url=url, payload=json, headers=headers)
            return FakeResponse()

        monkeypatch.setenv("LLM_API_KEY", "sekrit")
        monkeypatch.setattr("goalflow.llm.requests.post", fake_post)
        p = HTTPProvider(ProviderConfig(kind="http", base_url="http://x/v1/chat", model="m"))
        assert p.complete("hi") == "hello"
        assert seen["payload"]["model"] == "m"
        assert seen["payload"]["temperature"] == 0
        assert seen["headers"]["Authorization"] == "Bearer sekrit"

    def test_server_error_retries_then_raises(self, monkeypatch):
        calls = []

        class FakeResponse:
            status_code = 503
            text = "boom"

        monkeypatch.setattr(
            "goalflow.llm.requests.post", lambda *a, **k: calls.append(1) or FakeResponse()
        )
        monkeypatch.setattr("goalflow.llm.time.sleep", lambda s: None)
        p = HTTPProvider(ProviderConfig(kind="http", base_url="http://x", max_retries=2))
        with pytest.raises(ProviderHTTPError):
            p.complete("hi")
        assert len(calls) == 3

    def test_client_error_does_not_retry(self, monkeypatch):
        calls = []

        class FakeResponse:
            status_code = 401
            text = "denied"

        monkeypatch.setattr(
            "goalflow.llm.requests.post", lambda *a, **k: calls.append(1) or FakeResponse()
        )
        p = HTTPProvider(ProviderConfig(kind="http", base_url="http://x", max_retries=3))
        with pytest.raises(ProviderHTTPError) as exc:
            p.complete("hi")
        assert exc.value.status == 401
        assert len(calls) == 1


class TestBuild:
    def test_build_each_kind(self, tmp_path: Path):
        assert build_provider(ProviderConfig(kind="disabled")).kind == "disabled"
        fixture = tmp_path / "f.json"
        fixture.write_text("[]")
        cfg = ProviderConfig(kind="scripted", fixture_path="f.json")
        assert build_provider(cfg, root=tmp_path).kind == "scripted"
        assert build_provider(ProviderConfig(kind="http", base_url="http://x")).kind == "http"

    def test_unknown_kind_rejected(self):
        with pytest.raises(GatewayError):
            build_provider(ProviderConfig(kind="quantum"))

    def test_scripted_needs_fixture(self):
        with pytest.raises(GatewayError):
            build_provider(ProviderConfig(kind="scripted"))
