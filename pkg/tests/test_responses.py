"""Tests for template rendering and slot-filling response assembly."""

from __future__ import annotations

import pytest

from goalflow.dst import BeliefState, new_belief
from goalflow.goals import GoalWorkflow, SlotSpec, Step
from goalflow.llm import GatewayUnavailable, LLMGateway
from goalflow.qa import AnswerBundle
from goalflow.responses import (
    TemplateSet,
    default_templates,
    goal_action_phrase,
    load_templates,
    render_clarify,
    render_completion,
    render_overview,
    render_qa_text,
    render_slotfilling,
    render_step,
    render_step_restate,
    render_transition,
)


@pytest.fixture()
def ts() -> TemplateSet:
    return default_templates()


@pytest.fixture()
def hygiene() -> GoalWorkflow:
    return GoalWorkflow(
        id="data-hygiene",
        goal="Perform data hygiene to clean up and delete duplicate audience segments.",
        steps=(
            Step(0, "Detect duplicate segments by definition or outcome.", "Open the segment list."),
            Step(1, "Review the flagged pairs.", "Compare definitions side by side."),
            Step(2, "Merge or archive duplicates", "Pick the survivor for each pair."),
        ),
    )


@pytest.fixture()
def ticket() -> GoalWorkflow:
    return GoalWorkflow(
        id="support-ticket",
        goal="Create a support ticket.",
        slots=(
            SlotSpec(name="ticket title", description="a short summary"),
            SlotSpec(name="issue description", description="what went wrong"),
            SlotSpec(name="phone number", description="callback number", pattern=r"\b\d{10}\b"),
        ),
    )


class TestTemplateSet:
    def test_render_substitutes_named_placeholders(self, ts: TemplateSet) -> None:
        out = ts.render("step", number=2, total=5, name="Check logs", description="Open the console.")
        assert out == "Step 2 of 5: Check logs. Open the console."

    def test_render_leaves_unknown_placeholders_alone(self) -> None:
        custom = TemplateSet({"x": "a {left} b"})
        assert custom.render("x", other="1") == "a {left} b"

    def test_render_positional_name_avoids_keyword_collision(self) -> None:
        # A template may legitimately bind a value called "name".
        custom = TemplateSet({"x": "hello {name}"})
        assert custom.render("x", name="world") == "hello world"

    def test_unknown_template_raises(self, ts: TemplateSet) -> None:
        with pytest.raises(KeyError):
            ts.render("no_such_template")


class TestGoalActionPhrase:
    def test_leading_verb_kept_verbatim_lowercased(self) -> None:
        goal = "Perform data hygiene to clean up and delete duplicate audience segments."
        assert goal_action_phrase(goal) == (
            "perform data hygiene to clean up and delete duplicate audience segments"
        )

    def test_non_verb_start_gets_work_on_prefix(self) -> None:
        assert goal_action_phrase("A full pipeline audit.") == "work on a full pipeline audit"

    def test_trailing_period_stripped_before_check(self) -> None:
        assert goal_action_phrase("Delete stale exports.") == "delete stale exports"

    def test_empty_goal_degrades_to_continue(self) -> None:
        assert goal_action_phrase("   ") == "continue"


class TestGuidanceRendering:
    def test_overview_lists_every_step_once(self, ts: TemplateSet, hygiene: GoalWorkflow) -> None:
        text = render_overview(ts, hygiene)
        assert text.splitlines()[0] == (
            "Let's work on: Perform data hygiene to clean up and delete duplicate audience segments."
        )
        assert "Here is an overview of the 3 steps:" in text
        assert "Step 1: Detect duplicate segments by definition or outcome." in text
        assert "Step 2: Review the flagged pairs." in text
        assert "Step 3: Merge or archive duplicates." in text
        assert text.count("Step 1:") == 2  # once in the list, once as the opener
        assert "Starting with Step 1: Detect duplicate segments by definition or outcome. Open the segment list." in text
        assert text.endswith("Say next when you're ready to continue.")

    def test_overview_does_not_double_periods(self, ts: TemplateSet, hygiene: GoalWorkflow) -> None:
        assert ".." not in render_overview(ts, hygiene)

    def test_step_includes_position_and_description(self, ts: TemplateSet, hygiene: GoalWorkflow) -> None:
        assert render_step(ts, hygiene, 1) == (
            "Step 2 of 3: Review the flagged pairs. Compare definitions side by side."
        )

    def test_step_name_without_period_unharmed(self, ts: TemplateSet, hygiene: GoalWorkflow) -> None:
        assert render_step(ts, hygiene, 2) == (
            "Step 3 of 3: Merge or archive duplicates. Pick the survivor for each pair."
        )

    def test_transition_question_names_matched_step_and_goal(
        self, ts: TemplateSet, hygiene: GoalWorkflow
    ) -> None:
        text = render_transition(ts, hygiene, 0)
        assert text == (
            "That's covered by Step 1 (Detect duplicate segments by definition or outcome) "
            "of a bigger goal: Perform data hygiene to clean up and delete duplicate audience segments.\n"
            "Would you like to perform data hygiene to clean up and delete duplicate audience "
            "segments? (yes/no) If yes, we'll skip Step 1 since you've already covered it."
        )

    def test_reask_is_shorter_and_keeps_action(self, ts: TemplateSet, hygiene: GoalWorkflow) -> None:
        text = render_transition(ts, hygiene, 0, reask=True)
        assert text == (
            "Sorry, I need a quick yes or no: would you like to perform data hygiene to "
            "clean up and delete duplicate audience segments? (yes/no)"
        )
        assert "Step" not in text

    def test_completion_restates_goal(self, ts: TemplateSet, hygiene: GoalWorkflow) -> None:
        assert render_completion(ts, hygiene) == (
            "That completes the goal: Perform data hygiene to clean up and delete duplicate "
            "audience segments. Nice work! Is there anything else I can help you with?"
        )

    def test_step_restate_omits_description(self, ts: TemplateSet, hygiene: GoalWorkflow) -> None:
        assert render_step_restate(ts, hygiene, 1) == "We're on Step 2 of 3: Review the flagged pairs."

    def test_clarify_without_hint(self, ts: TemplateSet) -> None:
        assert render_clarify(ts) == (
            "You can say next, previous, or repeat; ask a question; or tell me what "
            "you'd like to work on."
        )

    def test_clarify_hint_gets_separating_space(self, ts: TemplateSet) -> None:
        assert render_clarify(ts, "No problem.").startswith("No problem. You can say next")


class TestQaText:
    def test_plain_answer_is_just_the_text(self, ts: TemplateSet) -> None:
        assert render_qa_text(ts, AnswerBundle(text="It depends.")) == "It depends."

    def test_sql_and_explanation_lines(self, ts: TemplateSet) -> None:
        bundle = AnswerBundle(
            text="You have 12 datasets.",
            sql_text="SELECT COUNT(*) FROM datasets",
            sql_explanation="Counts every row in the datasets table.",
        )
        assert render_qa_text(ts, bundle) == (
            "You have 12 datasets.\n"
            "SQL: SELECT COUNT(*) FROM datasets\n"
            "Explanation: Counts every row in the datasets table."
        )

    def test_citations_line_joins_doc_ids(self, ts: TemplateSet) -> None:
        bundle = AnswerBundle(text="Dataflows move data.", citations=("dataflows", "datasets"))
        assert render_qa_text(ts, bundle) == "Dataflows move data.\nSources: dataflows, datasets"


class _CannedProvider:
    """Returns one fixed completion regardless of the prompt."""

    kind = "scripted"

    def __init__(self, response: str):
        self.response = response
        self.prompts: list[str] = []

    def complete(self, prompt: str, template: str | None = None) -> str:
        self.prompts.append(prompt)
        return self.response


class _FailingProvider:
    kind = "scripted"

    def complete(self, prompt: str, template: str | None = None) -> str:
        raise GatewayUnavailable("down")


class TestSlotfilling:
    def test_fallback_requests_first_missing_slot(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        belief = new_belief(ticket)
        text, updated = render_slotfilling(ts, None, ticket, belief, [], "I need a ticket")
        assert text == "Could you share the ticket title?"
        assert updated.last_requested_slot == "ticket title"

    def test_fallback_summary_when_complete(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        belief = new_belief(ticket).with_values(
            {
                "ticket title": "Login page broken",
                "issue description": "SSO fails since this morning",
                "phone number": "5551234567",
            }
        )
        text, updated = render_slotfilling(ts, None, ticket, belief, [], "5551234567")
        assert text == (
            "Here is what I have: ticket title: Login page broken; "
            "issue description: SSO fails since this morning; "
            "phone number: 5551234567. Your request has been recorded."
        )
        assert updated.last_requested_slot is None
        assert "?" not in text

    def test_fallback_prefixes_answer_bundle(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        belief = new_belief(ticket).with_values({"ticket title": "Broken login"})
        bundle = AnswerBundle(text="You have 12 datasets.")
        text, updated = render_slotfilling(
            ts, None, ticket, belief, [], "how many datasets?", qa_bundle=bundle
        )
        assert text == "You have 12 datasets. Could you share the issue description?"
        assert updated.last_requested_slot == "issue description"

    def test_model_text_used_and_requested_slot_read_from_it(
        self, ts: TemplateSet, ticket: GoalWorkflow
    ) -> None:
        gateway = LLMGateway(_CannedProvider("Thanks! Now, what is the issue description?"))
        belief = new_belief(ticket).with_values({"ticket title": "Broken login"})
        text, updated = render_slotfilling(ts, gateway, ticket, belief, [], "Broken login")
        assert text == "Thanks! Now, what is the issue description?"
        assert updated.last_requested_slot == "issue description"

    def test_model_mentioning_later_slot_first_wins(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        gateway = LLMGateway(_CannedProvider("Share your phone number, then the issue description."))
        belief = new_belief(ticket).with_values({"ticket title": "x"})
        _, updated = render_slotfilling(ts, gateway, ticket, belief, [], "x")
        assert updated.last_requested_slot == "phone number"

    def test_model_text_without_slot_mention_defaults_to_first_missing(
        self, ts: TemplateSet, ticket: GoalWorkflow
    ) -> None:
        gateway = LLMGateway(_CannedProvider("Could you tell me a bit more?"))
        belief = new_belief(ticket)
        _, updated = render_slotfilling(ts, gateway, ticket, belief, [], "hi")
        assert updated.last_requested_slot == "ticket title"

    def test_answer_token_replaced_with_bundle_text(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        gateway = LLMGateway(_CannedProvider("<ANSWER> Now, could you share your phone number?"))
        belief = new_belief(ticket).with_values(
            {"ticket title": "t", "issue description": "d"}
        )
        bundle = AnswerBundle(text="You have 12 datasets.")
        text, updated = render_slotfilling(
            ts, gateway, ticket, belief, [], "how many datasets do I have?", qa_bundle=bundle
        )
        assert text == "You have 12 datasets. Now, could you share your phone number?"
        assert "<ANSWER>" not in text
        assert updated.last_requested_slot == "phone number"

    def test_answer_token_without_bundle_is_removed(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        gateway = LLMGateway(_CannedProvider("<ANSWER> What is the ticket title?"))
        belief = new_belief(ticket)
        text, _ = render_slotfilling(ts, gateway, ticket, belief, [], "hello")
        assert text == "What is the ticket title?"

    def test_every_answer_token_occurrence_replaced(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        gateway = LLMGateway(_CannedProvider("<ANSWER> Indeed: <ANSWER> What is the ticket title?"))
        belief = new_belief(ticket)
        bundle = AnswerBundle(text="Yes.")
        text, _ = render_slotfilling(ts, gateway, ticket, belief, [], "hey", qa_bundle=bundle)
        assert "<ANSWER>" not in text
        assert text == "Yes. Indeed: Yes. What is the ticket title?"

    def test_gateway_failure_falls_back_to_template(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        gateway = LLMGateway(_FailingProvider())
        belief = new_belief(ticket)
        text, updated = render_slotfilling(ts, gateway, ticket, belief, [], "hello")
        assert text == "Could you share the ticket title?"
        assert updated.last_requested_slot == "ticket title"

    def test_disabled_gateway_never_calls_provider(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        gateway = LLMGateway()  # disabled provider raises if complete() is reached
        belief = new_belief(ticket)
        text, _ = render_slotfilling(ts, gateway, ticket, belief, [], "hello")
        assert text == "Could you share the ticket title?"

    def test_history_and_utterance_reach_prompt(self, ts: TemplateSet, ticket: GoalWorkflow) -> None:
        provider = _CannedProvider("What is the ticket title?")
        gateway = LLMGateway(provider)
        belief = new_belief(ticket)
        history: list[tuple[str, str]] = [("user", "hi"), ("ai-assistant", "hello")]
        render_slotfilling(ts, gateway, ticket, belief, history, "I need a ticket")
        assert len(provider.prompts) == 1
        prompt = provider.prompts[0]
        assert "<<user>>: hi\n<<ai-assistant>>: hello" in prompt
        assert "I need a ticket" in prompt


class TestLoadTemplates:
    def test_sections_overlay_defaults(self, tmp_path) -> None:
        path = tmp_path / "replies.txt"
        path.write_text(
            "[farewell]\nSee you soon!\n[step]\n({number}/{total}) {name} -- {description}\n",
            encoding="utf-8",
        )
        ts = load_templates(path)
        assert ts.render("farewell") == "See you soon!"
        assert ts.render("step", number=1, total=2, name="A", description="B") == "(1/2) A -- B"
        # untouched sections keep the default wording
        assert ts.render("apology") == default_templates().render("apology")

    def test_multiline_section_preserved(self, tmp_path) -> None:
        path = tmp_path / "replies.txt"
        path.write_text("[overview]\nline one\nline two\n\n", encoding="utf-8")
        ts = load_templates(path)
        assert ts.render("overview") == "line one\nline two"

    def test_text_before_first_section_ignored(self, tmp_path) -> None:
        path = tmp_path / "replies.txt"
        path.write_text("stray preamble\n[farewell]\nBye.\n", encoding="utf-8")
        ts = load_templates(path)
        assert ts.render("farewell") == "Bye."
        assert "stray" not in "".join(ts.templates.values())
