"""Umbrella command line: generate, edit, render, train, eval, build-index,
and serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .appconfig import AppConfig
from .core.serialization import deserialize, serialize, structured_to_document
from .core.types import ValidationError
from .evaluation import evaluate_dataset, write_report
from .pipeline import load_runtime, run_edit, run_generation
from .render import render_frames
from .retrieval import (
    build_region_index,
    load_map_dataset,
    load_trace_points,
    save_region_index,
)


def _load_config(config_path: str | None, offline: bool | None,
                 checkpoint: str | None, index: str | None) -> AppConfig:
    config = AppConfig.from_file(config_path) if config_path else AppConfig()
    if offline is not None:
        config.offline = offline
    if checkpoint is not None:
        config.checkpoint = checkpoint
    if index is not None:
        config.index = index
    return config


@click.group()
def main() -> None:
    """Language-conditioned traffic scenario tooling."""


@main.command()
@click.option("--text", help="Scenario description.")
@click.option("--texts", "texts_file", type=click.Path(exists=True),
              help="File with one description per line (batch mode).")
@click.option("--offline/--online", default=None,
              help="Use the deterministic offline interpreter.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k", type=int, default=None, help="Retrieval top-k.")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="Output scenario file, or directory in batch mode.")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--checkpoint", type=click.Path(exists=True))
@click.option("--index", type=click.Path(exists=True))
def generate(text: str | None, texts_file: str | None, offline: bool | None,
             seed: int, k: int | None, out_path: str, config_path: str | None,
             checkpoint: str | None, index: str | None) -> None:
    """Generate scenarios from text descriptions."""
    if (text is None) == (texts_file is None):
        raise click.UsageError("provide exactly one of --text or --texts")
    config = _load_config(config_path, offline, checkpoint, index)
    runtime = load_runtime(config)

    if text is not None:
        result = run_generation(runtime, text, seed=seed, k=k)
        Path(out_path).write_bytes(serialize(result.scenario))
        click.echo(json.dumps({
            "out": out_path,
            "region_id": result.region_id,
            "seed": result.seed,
            "agents": len(result.scenario.agents),
            "code": structured_to_document(result.code),
            "warnings": list(result.warnings),
        }, indent=2))
        return

    out_dir = Path(out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [ln.strip() for ln in Path(texts_file).read_text().splitlines() if ln.strip()]
    for i, line in enumerate(lines):
        result = run_generation(runtime, line, seed=seed + i, k=k)
        target = out_dir / f"scenario_{i:03d}.json"
        target.write_bytes(serialize(result.scenario))
        click.echo(f"{target}  region={result.region_id} agents={len(result.scenario.agents)}")


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True))
@click.option("--instruction", required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--offline/--online", default=None)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--checkpoint", type=click.Path(exists=True))
@click.option("--index", type=click.Path(exists=True))
def edit(scenario_file: str, instruction: str, out_path: str,
         offline: bool | None, config_path: str | None,
         checkpoint: str | None, index: str | None) -> None:
    """Apply an editing instruction to a stored scenario."""
    config = _load_config(config_path, offline, checkpoint, index)
    runtime = load_runtime(config)
    scenario = deserialize(Path(scenario_file).read_bytes())
    result = run_edit(runtime, scenario, instruction)
    Path(out_path).write_bytes(serialize(result.scenario))
    click.echo(json.dumps({
        "out": out_path,
        "region_id": result.region_id,
        "code_before": structured_to_document(result.code_before),
        "code_after": structured_to_document(result.code_after),
        "warnings": list(result.warnings),
    }, indent=2))


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), required=True)
def render(scenario_file: str, out_dir: str) -> None:
    """Write one PNG frame per timestep."""
    scenario = deserialize(Path(scenario_file).read_bytes())
    frames = render_frames(scenario, out_dir)
    click.echo(f"wrote {len(frames)} frames to {out_dir}")


@main.command()
@click.option("--data", "data_dir", type=click.Path(exists=True), required=True,
              help="Directory of scenario JSON documents.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="JSON with optional 'generator' and 'training' sections.")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
def train(data_dir: str, config_path: str | None, out_dir: str, seed: int) -> None:
    """Train the generator on a directory of scenarios."""
    from dataclasses import replace
    from .generator.config import GeneratorConfig
    from .training.loop import TrainConfig, train as run_training

    overrides = json.loads(Path(config_path).read_text()) if config_path else {}
    generator_config = GeneratorConfig(**overrides.get("generator", {}))
    train_config = replace(TrainConfig(**overrides.get("training", {})), seed=seed)

    files = sorted(Path(data_dir).glob("*.json"))
    if not files:
        raise click.UsageError(f"no scenario documents under {data_dir}")
    dataset = [(deserialize(f.read_bytes()), None) for f in files]
    result = run_training(dataset, generator_config, train_config, out_dir=out_dir)
    click.echo(json.dumps({
        "epochs": len(result.metrics),
        "final_loss": result.metrics[-1]["loss_total"],
        "best": str(result.best_path),
        "last": str(result.last_path),
    }, indent=2))


@main.command("eval")
@click.option("--pred", "pred_dir", type=click.Path(exists=True), required=True)
@click.option("--ref", "ref_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--bandwidth", default="median", show_default=True,
              help="'median' or a fixed kernel width.")
def evaluate(pred_dir: str, ref_dir: str, out_path: str, bandwidth: str) -> None:
    """Compare generated scenarios against references."""
    policy: str | float = bandwidth if bandwidth == "median" else float(bandwidth)
    report = evaluate_dataset(pred_dir, ref_dir, bandwidth=policy)
    write_report(report, out_path, bandwidth=policy)
    click.echo(json.dumps(report.to_dict(), indent=2))


@main.command("build-index")
@click.option("--maps", "maps_dir", type=click.Path(exists=True), required=True)
@click.option("--traces", "traces_file", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--radius", type=float, default=60.0, show_default=True)
def build_index(maps_dir: str, traces_file: str, out_dir: str, radius: float) -> None:
    """Preprocess a map dataset into a retrieval index."""
    maps = load_map_dataset(maps_dir)
    traces = load_trace_points(traces_file)
    index = build_region_index(maps, traces, radius=radius)
    save_region_index(index, out_dir)
    click.echo(f"indexed {len(index)} regions ({index.skipped} traces skipped) -> {out_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(config_path: str | None, host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn
    from .service import create_app

    config = AppConfig.from_file(config_path) if config_path else AppConfig()
    uvicorn.run(create_app(config), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
