"""Chat-completion clients: a real HTTP backend, a canned stub for tests,
and a rule-based offline editor that mimics an instruction-following model."""

from __future__ import annotations

import json
import os
import re
from typing import Protocol

import httpx

from .parser import extract_vectors, render_structured_block, clamp_vectors

Message = dict[str, str]


class TransportError(RuntimeError):
    """The chat backend could not be reached or returned garbage."""


class ChatClient(Protocol):
    def send(self, messages: list[Message], temperature: float) -> str: ...


class HttpChatClient:
    """OpenAI-style chat-completions client.

    The API key is read from the environment variable named in the config,
    never stored in files.
    """

    def __init__(self, endpoint: str, model: str,
                 api_key_env: str = "LLM_API_KEY", timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout

    def send(self, messages: list[Message], temperature: float) -> str:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {"model": self.model, "messages": messages, "temperature": temperature}
        try:
            response = httpx.post(self.endpoint, headers=headers,
                                  content=json.dumps(payload), timeout=self.timeout)
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, json.JSONDecodeError) as exc:
            raise TransportError(f"chat backend failure: {exc}") from exc


class StubChatClient:
    """Replays a scripted sequence of responses and records every call."""

    def __init__(self, script: list[str]):
        self.script = list(script)
        self.calls: list[list[Message]] = []

    @classmethod
    def fixed(cls, response: str, repeats: int = 16) -> "StubChatClient":
        return cls([response] * repeats)

    def send(self, messages: list[Message], temperature: float) -> str:
        self.calls.append(messages)
        if not self.script:
            raise TransportError("stub script exhausted")
        return self.script.pop(0)


_REMOVE = re.compile(r"\b(?:remove|delete|drop)\s+(?:vehicle|car|actor|agent)\s*#?\s*(\d+)",
                     re.IGNORECASE)
_ADD_BEHIND = re.compile(r"\badd\b.*\b(?:behind|in the back of)\b", re.IGNORECASE)
_ADD_FRONT = re.compile(r"\badd\b.*\b(?:in front of|ahead of)\b", re.IGNORECASE)
_STOP_VEHICLE = re.compile(r"\b(?:make|have)\s+(?:vehicle|car)\s*#?\s*(\d+)\s+stop",
                           re.IGNORECASE)
_EGO_ACTION = re.compile(
    r"\b(?:ego(?:\s+(?:car|vehicle))?|center car)\s+(stops|turns left|turns right|moves straight)",
    re.IGNORECASE)
_IDENTITY = re.compile(r"\bkeep everything the same\b|\bno[- ]?op\b|\bdo not change\b",
                       re.IGNORECASE)


class OfflineEditClient:
    """Deterministic stand-in for an instruction-following model.

    Reads the current code and the instruction out of the last user
    message and answers with an edited code in the canonical block format,
    so the normal response-parsing path is exercised end to end.
    """

    def send(self, messages: list[Message], temperature: float) -> str:
        request = messages[-1]["content"]
        map_vec, agent_vecs, _ = extract_vectors(request)
        instruction = ""
        for line in request.splitlines():
            if line.lower().startswith("instruction:"):
                instruction = line.split(":", 1)[1].strip()
        edited = self._apply(instruction, [list(v) for v in agent_vecs])
        code, _ = clamp_vectors(map_vec, edited, edit_mode=True)
        return render_structured_block(code, summary=f"applied: {instruction or 'nothing'}")

    @staticmethod
    def _apply(instruction: str, agents: list[list[int]]) -> list[list[int]]:
        if _IDENTITY.search(instruction):
            return agents
        removed = _REMOVE.search(instruction)
        if removed:
            index = int(removed.group(1)) - 1
            if 0 < index < len(agents):
                agents.pop(index)
            return agents
        if _ADD_BEHIND.search(instruction):
            agents.append([4, 1, 0, 1, 4, 4, 4, 4])
            return agents
        if _ADD_FRONT.search(instruction):
            agents.append([1, 1, 0, 1, 4, 4, 4, 4])
            return agents
        stop = _STOP_VEHICLE.search(instruction)
        if stop:
            index = int(stop.group(1)) - 1
            if 0 <= index < len(agents):
                agents[index] = agents[index][:3] + [0, 7, 7, 7, 7]
            return agents
        ego_action = _EGO_ACTION.search(instruction)
        if ego_action and agents:
            verb = ego_action.group(1).lower()
            if verb == "stops":
                agents[0] = agents[0][:3] + [0, 7, 7, 7, 7]
            elif verb == "turns left":
                agents[0] = agents[0][:4] + [2, 2, 4, 4]
            elif verb == "turns right":
                agents[0] = agents[0][:4] + [3, 3, 4, 4]
            else:
                agents[0] = agents[0][:4] + [4, 4, 4, 4]
            return agents
        return agents
