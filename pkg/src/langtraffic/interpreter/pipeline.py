"""Turn text into structured codes via a chat model, with clamping,
retries, and edit-consistency checks."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .client import ChatClient
from .parser import BlockParseError, clamp_vectors, extract_vectors
from .templates import PromptMode, PromptTemplate, edit_request_text, load_template
from ..core.types import StructuredScenario

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.2
PARSE_RETRIES = 2

_CORRECTION = (
    "Your previous answer could not be parsed ({error}). Answer again with "
    "exactly one 'Map: [six integers]' line and one 'Actor Vk: [eight "
    "integers]' line per vehicle."
)

_MENTION = re.compile(r"\b(?:vehicle|car|actor|agent|v)\s*#?\s*(\d+)\b", re.IGNORECASE)
_EGO_MENTION = re.compile(r"\bego\b|\bcenter car\b", re.IGNORECASE)


class ResponseParseError(ValueError):
    """The model response stayed unparseable after retries."""

    def __init__(self, message: str, raw_response: str):
        super().__init__(message)
        self.raw_response = raw_response


@dataclass(frozen=True)
class InterpreterOutput:
    summary: str
    structured: StructuredScenario
    raw_response: str
    warnings: tuple[str, ...] = field(default_factory=tuple)


def _request(client: ChatClient, messages: list[dict[str, str]], temperature: float,
             edit_mode: bool) -> InterpreterOutput:
    attempts = messages
    raw = ""
    for attempt in range(1 + PARSE_RETRIES):
        raw = client.send(attempts, temperature)
        try:
            map_vec, agent_vecs, summary = extract_vectors(raw)
        except BlockParseError as exc:
            logger.warning("parse attempt %d failed: %s", attempt + 1, exc)
            attempts = attempts + [
                {"role": "assistant", "content": raw},
                {"role": "user", "content": _CORRECTION.format(error=exc)},
            ]
            continue
        code, warnings = clamp_vectors(map_vec, agent_vecs, edit_mode=edit_mode)
        return InterpreterOutput(summary=summary, structured=code,
                                 raw_response=raw, warnings=tuple(warnings))
    raise ResponseParseError(
        f"no parseable structured block after {1 + PARSE_RETRIES} attempts", raw)


def interpret(text: str, client: ChatClient,
              template: PromptTemplate | None = None,
              temperature: float = DEFAULT_TEMPERATURE) -> InterpreterOutput:
    """Scenario description -> structured code through the generation prompt."""
    if not text.strip():
        raise ValueError("empty scenario description")
    if template is None:
        template = load_template(PromptMode.GENERATION)
    return _request(client, template.messages(text), temperature, edit_mode=False)


def mentioned_agents(instruction: str, agent_count: int) -> set[int]:
    """0-based indices of the agents an instruction names (V1 = index 0)."""
    mentioned = {int(m) - 1 for m in _MENTION.findall(instruction)}
    if _EGO_MENTION.search(instruction):
        mentioned.add(0)
    return {i for i in mentioned if 0 <= i < agent_count}


def check_unmentioned_agents(before: StructuredScenario, after: StructuredScenario,
                             instruction: str) -> list[str]:
    """Unmentioned agents must come back with unchanged vectors.

    Violations are reported, not raised: the instruction may legitimately
    imply broader changes the mention heuristic cannot see.
    """
    warnings = []
    mentioned = mentioned_agents(instruction, len(before.agents))
    before_vecs = [a.to_ints() for a in before.agents]
    after_vecs = [a.to_ints() for a in after.agents]
    if len(before_vecs) == len(after_vecs):
        for i, (b, a) in enumerate(zip(before_vecs, after_vecs)):
            if i not in mentioned and b != a:
                warnings.append(f"unmentioned agent {i + 1} changed: {b} -> {a}")
    else:
        remaining = list(after_vecs)
        for i, b in enumerate(before_vecs):
            if i in mentioned:
                continue
            if b in remaining:
                remaining.remove(b)
            else:
                warnings.append(f"unmentioned agent {i + 1} missing or changed: {b}")
    return warnings


def interpret_edit(code: StructuredScenario, instruction: str, client: ChatClient,
                   template: PromptTemplate | None = None,
                   temperature: float = DEFAULT_TEMPERATURE) -> InterpreterOutput:
    """Apply an editing instruction to an existing code (5-meter bins)."""
    if not instruction.strip():
        raise ValueError("empty edit instruction")
    if template is None:
        template = load_template(PromptMode.EDITING)
    request = edit_request_text(code, instruction)
    output = _request(client, template.messages(request), temperature, edit_mode=True)
    warnings = output.warnings + tuple(
        check_unmentioned_agents(code, output.structured, instruction))
    return InterpreterOutput(summary=output.summary, structured=output.structured,
                             raw_response=output.raw_response, warnings=warnings)
