"""HTTP service: /v1/generate, /v1/edit, scenario retrieval, and frames."""

from __future__ import annotations

import logging
from typing import Any

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from .appconfig import AppConfig
from .core.serialization import (
    scenario_from_document,
    scenario_to_document,
    structured_to_document,
)
from .core.types import ValidationError
from .interpreter.client import TransportError
from .interpreter.fallback import GrammarError
from .interpreter.pipeline import ResponseParseError
from .pipeline import Runtime, load_runtime, run_edit, run_generation
from .render import frame_bytes
from .store import ScenarioNotFound, ScenarioStore

logger = logging.getLogger(__name__)


class GenerateRequest(BaseModel):
    text: str
    seed: int | None = None
    k: int | None = Field(default=None, ge=1)
    map_id: str | None = None


class EditRequest(BaseModel):
    scenario_id: str | None = None
    scenario: dict[str, Any] | None = None
    instruction: str


def create_app(config: AppConfig | None = None,
               runtime: Runtime | None = None) -> FastAPI:
    config = config or AppConfig()
    if runtime is None:
        runtime = load_runtime(config)
    store = ScenarioStore(config.store_dir)

    app = FastAPI(title="langtraffic", version="0.1.0")
    app.state.runtime = runtime
    app.state.store = store

    @app.get("/v1/health")
    def health() -> dict:
        return {
            "status": "ok",
            "offline": runtime.config.offline,
            "index_size": len(runtime.index),
        }

    @app.post("/v1/generate")
    def generate(request: GenerateRequest) -> dict:
        if not request.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        if not len(runtime.index):
            raise HTTPException(status_code=503, detail="region index is empty")
        try:
            result = run_generation(runtime, request.text, seed=request.seed,
                                    k=request.k, map_id=request.map_id)
        except (TransportError, ResponseParseError) as exc:
            raise HTTPException(status_code=502, detail=_interpreter_detail(exc))
        except (ValidationError, GrammarError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        sid = store.put(result.scenario)
        return {
            "scenario_id": sid,
            "scenario": scenario_to_document(result.scenario),
            "code": structured_to_document(result.code),
            "region_id": result.region_id,
            "summary": result.summary,
            "warnings": list(result.warnings),
            "seed": result.seed,
        }

    @app.post("/v1/edit")
    def edit(request: EditRequest) -> dict:
        if not request.instruction.strip():
            raise HTTPException(status_code=400, detail="instruction must be non-empty")
        if request.scenario is not None:
            try:
                scenario = scenario_from_document(request.scenario)
            except (ValidationError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        elif request.scenario_id is not None:
            try:
                scenario = store.get(request.scenario_id)
            except ScenarioNotFound:
                raise HTTPException(status_code=404,
                                    detail=f"unknown scenario {request.scenario_id}")
        else:
            raise HTTPException(status_code=400,
                                detail="provide scenario_id or an inline scenario")
        try:
            result = run_edit(runtime, scenario, request.instruction)
        except (TransportError, ResponseParseError) as exc:
            raise HTTPException(status_code=502, detail=_interpreter_detail(exc))
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        sid = store.put(result.scenario)
        return {
            "scenario_id": sid,
            "scenario": scenario_to_document(result.scenario),
            "code_before": structured_to_document(result.code_before),
            "code_after": structured_to_document(result.code_after),
            "region_id": result.region_id,
            "summary": result.summary,
            "warnings": list(result.warnings),
        }

    @app.get("/v1/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str) -> Response:
        try:
            payload = store.get_bytes(scenario_id)
        except ScenarioNotFound:
            raise HTTPException(status_code=404, detail=f"unknown scenario {scenario_id}")
        return Response(content=payload, media_type="application/json")

    @app.get("/v1/scenarios/{scenario_id}/frames/{t}")
    def get_frame(scenario_id: str, t: int) -> Response:
        try:
            scenario = store.get(scenario_id)
        except ScenarioNotFound:
            raise HTTPException(status_code=404, detail=f"unknown scenario {scenario_id}")
        try:
            png = frame_bytes(scenario, t)
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return Response(content=png, media_type="image/png")

    return app


def _interpreter_detail(exc: Exception) -> str:
    detail = f"interpreter failure: {exc}"
    raw = getattr(exc, "raw_response", "")
    if raw:
        detail += f" | response excerpt: {raw[:200]}"
    return detail
