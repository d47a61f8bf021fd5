"""End-to-end composition: interpret -> retrieve -> generate, and the
three-stage editing loop. Shared by the HTTP service and the CLI."""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from . import synth
from .appconfig import AppConfig
from .core.encoder import encode_scenario, rescale_distance_bins
from .core.types import (
    EDIT_DISTANCE_BIN_MAX,
    EDIT_DISTANCE_BIN_METERS,
    MapRegion,
    Scenario,
    StructuredScenario,
    ValidationError,
)
from .generator.checkpoint import load_checkpoint
from .generator.config import GeneratorConfig
from .generator.model import ScenarioGenerator, build_model
from .generator.sampling import generate_scenario
from .interpreter.client import ChatClient, HttpChatClient, OfflineEditClient
from .interpreter.fallback import fallback_interpret
from .interpreter.pipeline import InterpreterOutput, interpret, interpret_edit
from .retrieval import RegionIndex, build_region_index, load_region_index, retrieve


@dataclass
class Runtime:
    """Loaded model, index, and clients for one configured deployment."""

    config: AppConfig
    model: ScenarioGenerator
    index: RegionIndex
    chat_client: ChatClient | None
    edit_client: ChatClient


def bundled_index() -> RegionIndex:
    """In-memory index over the bundled synthetic map library."""
    maps, traces = synth.map_library()
    return build_region_index(maps, traces)


def load_runtime(config: AppConfig) -> Runtime:
    if config.checkpoint:
        model, _ = load_checkpoint(config.checkpoint)
    else:
        model = build_model(GeneratorConfig(), seed=config.weights_seed)
    model.eval()
    index = load_region_index(config.index) if config.index else bundled_index()
    chat_client: ChatClient | None = None
    if not config.offline:
        if not config.llm_endpoint:
            raise ValidationError("online mode requires llm_endpoint in the config")
        chat_client = HttpChatClient(config.llm_endpoint, config.llm_model,
                                     api_key_env=config.llm_api_key_env)
    edit_client = chat_client if chat_client is not None else OfflineEditClient()
    return Runtime(config=config, model=model, index=index,
                   chat_client=chat_client, edit_client=edit_client)


@dataclass
class GenerationResult:
    scenario: Scenario
    code: StructuredScenario
    region_id: str
    summary: str
    warnings: tuple[str, ...]
    seed: int


def fresh_seed() -> int:
    return secrets.randbelow(2 ** 31)


def run_generation(runtime: Runtime, text: str, seed: int | None = None,
                   k: int | None = None, map_id: str | None = None,
                   client: ChatClient | None = None) -> GenerationResult:
    """text -> code -> map -> scenario."""
    if not text.strip():
        raise ValidationError("empty scenario description")
    if seed is None:
        seed = fresh_seed()
    k = k if k is not None else runtime.config.retrieval_k

    chat = client if client is not None else runtime.chat_client
    if chat is not None:
        output = interpret(text, chat)
        code, summary, warnings = output.structured, output.summary, output.warnings
    else:
        code = fallback_interpret(text)
        summary = f"offline interpretation: {text.strip()}"
        warnings = ()

    if map_id is not None:
        matches = [e.region for e in runtime.index.entries if e.region_id == map_id]
        if not matches:
            raise ValidationError(f"unknown map_id {map_id!r}")
        region = matches[0]
    else:
        region = retrieve(runtime.index, code.map_abstract, k=k, rng_seed=seed)

    scenario, _ = generate_scenario(runtime.model, code, region)
    return GenerationResult(scenario=scenario, code=code, region_id=region.region_id,
                            summary=summary, warnings=warnings, seed=seed)


@dataclass
class EditResult:
    scenario: Scenario
    code_before: StructuredScenario
    code_after: StructuredScenario
    region_id: str
    summary: str
    warnings: tuple[str, ...]


def run_edit(runtime: Runtime, scenario: Scenario, instruction: str,
             client: ChatClient | None = None) -> EditResult:
    """encode -> instruct -> regenerate on the same map.

    The editing exchange uses fine 5-meter distance bins; the edited code
    is rescaled to the generator's 20-meter vocabulary before decoding.
    """
    code_before = encode_scenario(scenario,
                                  distance_bin_size=EDIT_DISTANCE_BIN_METERS,
                                  distance_bin_max=EDIT_DISTANCE_BIN_MAX)
    chat = client if client is not None else runtime.edit_client
    output: InterpreterOutput = interpret_edit(code_before, instruction, chat)
    code_after = output.structured

    region: MapRegion = scenario.map
    generator_code = rescale_distance_bins(code_after,
                                           source_bin=EDIT_DISTANCE_BIN_METERS)
    edited, _ = generate_scenario(runtime.model, generator_code, region)
    return EditResult(scenario=edited, code_before=code_before, code_after=code_after,
                      region_id=region.region_id, summary=output.summary,
                      warnings=output.warnings)
