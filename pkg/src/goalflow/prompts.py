"""Canonical prompt templates for every model-backed path.

These strings are the wire contract between the engine and its model
provider: scripted test fixtures match on substrings of the rendered text,
so the templates are frozen byte-for-byte. No other module may define
prompt text; everything renders through :func:`render`.

Placeholders use ``{name}`` syntax and are substituted literally with no
escaping or reformatting.
"""

from __future__ import annotations

import re


class PromptError(Exception):
    pass


class UnknownTemplateError(PromptError):
    def __init__(self, name: str):
        super().__init__(f"unknown prompt template: {name!r}")


class UnboundPlaceholderError(PromptError):
    def __init__(self, template_name: str, placeholder: str):
        self.placeholder = placeholder
        super().__init__(f"template {template_name!r} is missing a value for {{{placeholder}}}")


DST_TEMPLATE = """Capture entity values from last utterance of the conversation according to examples.
Capture pair "entity:value" separated by colon and no spaces in between.
Format the output in JSON.
If not specified, leave the value empty. Values that should be captured are:
{slots}

### Here is the conversation between user and ai-assistant:
{chat_history}
<<user>>: {current_utterance}

Capture all the entity values based on the conversation above and format the output in JSON:"""

SLOTFILL_RG_TEMPLATE = """You are a task-oriented dialogue system designed to assist users in completing specific tasks such as booking a hotel or booking a flight. Your goal is to gather all necessary information (slots) required to complete the task through a series of user interactions. If all required slots are collected, you should confirm that the task has been completed.

### Task:
{task}

### Filled Slots:
{filled_slots}

### Missing Slots:
{missing_slots}

### Here is the conversation between user and ai-assistant:
{chat_history}
<<user>>: {current_utterance}

### Requirements:
1. If there are remaining slots that need to be filled, generate a polite and contextually appropriate utterance to request the next missing piece of information from the user. Ask one missing slot at a time.
2. If all required slots have been filled, briefly summarize all the collected slot information without asking the user any questions.
3. If the user asks a question, exactly start the placeholder <ANSWER> as the response, followed by a polite and contextually appropriate utterance to request the next missing piece of information from the user.

Generate an contextually appropriate user-facing utterance based on the current task, slot information and the conversation. The generated utterance should be friendly, polite, and positive.

<<ai-assistant>>: """

NL2GOAL_TEMPLATE = """Given a paragraph that describes a specific goal and its associated workflow, your task is to generate a YAML snippet that structures the information into a list of steps. Each step should include a "name" field summarizing the step and a "description" field for explaining additional details. Ensure that the step numbers in the YAML snippet are consistent with the numbers in the workflow.

### Example:

I have a goal to resolve an issue where the data pipeline is failing at the transformation stage. The workflow to address this involves the following steps: first, investigate the transformation logic to ensure all mappings and transformations are correct; second, verify that the data sources are providing complete and accurate data; and third, check the pipeline logs for any errors that might indicate issues during the transformation process.

The corresponding YAML should look like this:

workflow:
    - goal: "Resolve the issue where the data pipeline is failing at the transformation stage."
    steps:
        - name: "Investigate the transformation logic."
        description: "Ensure that all mappings and transformations are correct."

        - name: "Data verification."
        description: "Verify that the data sources are providing complete and accurate data."

        - name: "Check for errors."
        description: "Look for any errors in the pipeline logs that indicate issues during transformation."

### Task:

{new_goal}

Generate the corresponding YAML snippet:"""

PRODUCT_QA_TEMPLATE = """Answer the user's question using only the reference passages below. Quote names and values exactly as they appear in the passages. If the passages do not contain the answer, reply with the single word UNKNOWN.

### Reference passages:
{passages}

### Question:
{question}

Answer:"""

TEMPLATES: dict[str, str] = {
    "dst": DST_TEMPLATE,
    "slotfill_rg": SLOTFILL_RG_TEMPLATE,
    "nl2goal": NL2GOAL_TEMPLATE,
    "product_qa": PRODUCT_QA_TEMPLATE,
}

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


def placeholders(template_name: str) -> list[str]:
    """Placeholder names appearing in a template, in order of first use."""
    if template_name not in TEMPLATES:
        raise UnknownTemplateError(template_name)
    seen: list[str] = []
    for m in _PLACEHOLDER_RE.finditer(TEMPLATES[template_name]):
        if m.group(1) not in seen:
            seen.append(m.group(1))
    return seen


def render(template_name: str, /, **bindings: str) -> str:
    """Substitute placeholders literally; every placeholder must be bound."""
    if template_name not in TEMPLATES:
        raise UnknownTemplateError(template_name)
    text = TEMPLATES[template_name]
    for name in placeholders(template_name):
        if name not in bindings:
            raise UnboundPlaceholderError(template_name, name)
        text = text.replace("{" + name + "}", str(bindings[name]))
    return text
