"""Versioned prompt templates for scenario generation and editing.

Templates live as plain-text files under prompts/ and are parsed into
sections; the final request is assembled as chat messages with the
few-shot examples as user/assistant turns.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .parser import render_structured_block
from ..core.types import StructuredScenario, ValidationError


class PromptMode(enum.Enum):
    GENERATION = "generation"
    EDITING = "editing"


_SECTION_PREFIX = "=== "
_SECTION_SUFFIX = " ==="


@dataclass(frozen=True)
class PromptTemplate:
    task_description: str
    cot_instructions: str
    representation_spec: str
    guidelines: str
    few_shot_examples: tuple[tuple[str, str], ...]
    mode: PromptMode

    def __post_init__(self) -> None:
        # The editing code shrinks distance bins (5 m) so unedited agents
        # keep their region; the generation code uses coarse 20 m bins.
        required = "20-meter" if self.mode is PromptMode.GENERATION else "5-meter"
        if required not in self.representation_spec:
            raise ValidationError(
                f"{self.mode.value} template must describe {required} distance bins"
            )

    def system_text(self) -> str:
        return "\n\n".join([
            self.task_description,
            self.cot_instructions,
            self.representation_spec,
            self.guidelines,
        ])

    def messages(self, request: str) -> list[dict[str, str]]:
        msgs = [{"role": "system", "content": self.system_text()}]
        for example_in, example_out in self.few_shot_examples:
            msgs.append({"role": "user", "content": example_in})
            msgs.append({"role": "assistant", "content": example_out})
        msgs.append({"role": "user", "content": request})
        return msgs


def edit_request_text(code: StructuredScenario, instruction: str) -> str:
    """The final user turn of an editing request: current code + instruction."""
    return (
        "Current scenario code:\n"
        f"{render_structured_block(code)}\n"
        f"Instruction: {instruction}"
    )


def parse_template_text(text: str, mode: PromptMode) -> PromptTemplate:
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith(_SECTION_PREFIX) and stripped.endswith(_SECTION_SUFFIX):
            current = stripped[len(_SECTION_PREFIX):-len(_SECTION_SUFFIX)].strip().upper()
            sections.setdefault(current, [])
        elif current is not None:
            sections[current].append(line)

    def section(name: str) -> str:
        if name not in sections:
            raise ValidationError(f"prompt template missing section '{name}'")
        return "\n".join(sections[name]).strip()

    examples = []
    inputs = _split_repeats(text, "EXAMPLE INPUT")
    outputs = _split_repeats(text, "EXAMPLE OUTPUT")
    if len(inputs) != len(outputs):
        raise ValidationError("unbalanced example input/output sections")
    examples = tuple(zip(inputs, outputs))

    return PromptTemplate(
        task_description=section("TASK"),
        cot_instructions=section("REASONING"),
        representation_spec=section("REPRESENTATION"),
        guidelines=section("GUIDELINES"),
        few_shot_examples=examples,
        mode=mode,
    )


def _split_repeats(text: str, name: str) -> list[str]:
    marker = f"{_SECTION_PREFIX}{name}{_SECTION_SUFFIX}"
    chunks = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        if lines[i].strip() == marker:
            body = []
            i += 1
            while i < len(lines) and not (lines[i].strip().startswith(_SECTION_PREFIX)
                                          and lines[i].strip().endswith(_SECTION_SUFFIX)):
                body.append(lines[i])
                i += 1
            chunks.append("\n".join(body).strip())
        else:
            i += 1
    return chunks


def load_template(mode: PromptMode, path: str | Path | None = None) -> PromptTemplate:
    """Load a template from an explicit path or the packaged prompts/ file."""
    if path is not None:
        text = Path(path).read_text()
    else:
        filename = f"{mode.value}.txt"
        text = resources.files("langtraffic").joinpath("prompts", filename).read_text()
    return parse_template_text(text, mode)
