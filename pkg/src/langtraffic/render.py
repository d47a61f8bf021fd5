"""Frame rendering: one PNG per timestep, lanes by type, vehicles as
oriented rectangles with the ego highlighted. Pure function of its inputs."""

from __future__ import annotations

import io
import math
from pathlib import Path

from PIL import Image, ImageDraw

from .core.types import LaneType, LightState, Scenario, ValidationError

CANVAS = 512          # px, square
SCALE = 10.0          # px per meter
BACKGROUND = (24, 24, 28)
LANE_COLORS = {
    LaneType.CENTER: (95, 95, 110),
    LaneType.EDGE: (200, 200, 200),
    LaneType.BOUNDARY: (235, 160, 60),
}
LIGHT_COLORS = {
    LightState.RED: (220, 60, 60),
    LightState.YELLOW: (230, 200, 60),
    LightState.GREEN: (80, 200, 90),
}
EGO_COLOR = (230, 70, 70)
AGENT_COLOR = (90, 160, 230)


def render_frame(scenario: Scenario, t: int, canvas: int = CANVAS,
                 scale: float = SCALE) -> Image.Image:
    """Render timestep t (1-based) centered on the ego's initial position."""
    if not 1 <= t <= scenario.horizon:
        raise ValidationError(f"frame {t} outside [1, {scenario.horizon}]")
    ego0 = scenario.ego.states[0]
    cx, cy = ego0.x, ego0.y
    half = canvas / 2.0

    def to_px(x: float, y: float) -> tuple[float, float]:
        return (half + (x - cx) * scale, half - (y - cy) * scale)

    image = Image.new("RGB", (canvas, canvas), BACKGROUND)
    draw = ImageDraw.Draw(image)

    for lane in scenario.map.lanes:
        draw.line([to_px(*lane.start), to_px(*lane.end)],
                  fill=LANE_COLORS[lane.lane_type], width=2)
        if lane.light is not LightState.NONE:
            ex, ey = to_px(*lane.end)
            draw.ellipse([ex - 3, ey - 3, ex + 3, ey + 3],
                         fill=LIGHT_COLORS[lane.light])

    for index, track in enumerate(scenario.agents):
        state = track.states[t - 1]
        c, s = math.cos(state.heading), math.sin(state.heading)
        hl, hw = state.length / 2.0, state.width / 2.0
        corners = [
            to_px(state.x + c * dx - s * dy, state.y + s * dx + c * dy)
            for dx, dy in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))
        ]
        if index == scenario.ego_index:
            draw.polygon(corners, fill=EGO_COLOR)
        else:
            draw.polygon(corners, outline=AGENT_COLOR, width=2)
        nose = to_px(state.x + c * hl, state.y + s * hl)
        center = to_px(state.x, state.y)
        draw.line([center, nose], fill=(255, 255, 255), width=1)

    return image


def frame_bytes(scenario: Scenario, t: int, **kwargs) -> bytes:
    buffer = io.BytesIO()
    render_frame(scenario, t, **kwargs).save(buffer, format="PNG")
    return buffer.getvalue()


def render_frames(scenario: Scenario, out_dir: str | Path | None = None,
                  **kwargs) -> list[Image.Image]:
    """All frames in order; optionally written as frame_0001.png ..."""
    frames = [render_frame(scenario, t, **kwargs)
              for t in range(1, scenario.horizon + 1)]
    if out_dir is not None:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        for t, frame in enumerate(frames, start=1):
            frame.save(path / f"frame_{t:04d}.png")
    return frames
