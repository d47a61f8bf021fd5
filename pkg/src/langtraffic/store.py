"""Content-addressed scenario store on local disk.

Ids are a hash prefix of the canonical document, so identical scenarios
share an id and a stored document can never drift from its id.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .core.serialization import deserialize, serialize
from .core.types import Scenario

ID_LENGTH = 16


class ScenarioNotFound(KeyError):
    pass


def scenario_id(document: bytes) -> str:
    return hashlib.sha256(document).hexdigest()[:ID_LENGTH]


class ScenarioStore:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, sid: str) -> Path:
        return self.directory / f"{sid}.json"

    def put(self, scenario: Scenario) -> str:
        document = serialize(scenario)
        sid = scenario_id(document)
        path = self._path(sid)
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(document)
            tmp.replace(path)
        return sid

    def get_bytes(self, sid: str) -> bytes:
        path = self._path(sid)
        if not path.exists():
            raise ScenarioNotFound(sid)
        return path.read_bytes()

    def get(self, sid: str) -> Scenario:
        return deserialize(self.get_bytes(sid))

    def __contains__(self, sid: str) -> bool:
        return self._path(sid).exists()
