"""Map-region retrieval: preprocess a map dataset into candidate regions
with precomputed abstracts, then sample a region matching a query abstract.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import geometry as geo
from .core.encoder import abstract_map, nearest_center_lane
from .core.geometry import Point
from .core.serialization import ParseError, _field, _point
from .core.types import (
    MAX_LANES,
    LaneSegment,
    LaneType,
    LightState,
    MapAbstract,
    MapRegion,
    ValidationError,
)

logger = logging.getLogger(__name__)

REGION_RADIUS = 60.0
DEFAULT_TOP_K = 10

TracePoint = tuple[str, Point, float]  # (map_id, point, heading)


@dataclass(frozen=True)
class IndexEntry:
    region_id: str
    region: MapRegion
    abstract: MapAbstract


@dataclass(frozen=True)
class RegionIndex:
    entries: tuple[IndexEntry, ...]
    skipped: int = 0
    radius: float = REGION_RADIUS

    def __len__(self) -> int:
        return len(self.entries)


def _cut_region(lanes: list[LaneSegment], point: Point, heading: float,
                region_id: str, radius: float) -> MapRegion | None:
    """Lanes within `radius` of the point, re-centered and rotated so the
    trace heading becomes +x. Oversized regions keep the nearest lanes."""
    nearby = [
        (geo.point_segment_distance(point, l.start, l.end), l)
        for l in lanes
    ]
    nearby = [(d, l) for d, l in nearby if d <= radius]
    if not nearby:
        return None
    nearby.sort(key=lambda pair: (pair[0], pair[1].id))
    nearby = nearby[:MAX_LANES]

    moved = tuple(
        LaneSegment(
            id=lane.id,
            start=geo.transform_point(lane.start, point, heading),
            end=geo.transform_point(lane.end, point, heading),
            lane_type=lane.lane_type,
            light=lane.light,
        )
        for _, lane in nearby
    )
    return MapRegion(lanes=moved, region_id=region_id, center=(0.0, 0.0))


def build_region_index(maps: dict[str, list[LaneSegment]],
                       trace_points: list[TracePoint],
                       radius: float = REGION_RADIUS) -> RegionIndex:
    """One candidate region per drive-trace point, with its abstract."""
    if not trace_points:
        raise ValidationError("no trace points to index")
    entries = []
    skipped = 0
    for i, (map_id, point, heading) in enumerate(trace_points):
        if map_id not in maps:
            raise ValidationError(f"trace {i}: unknown map '{map_id}'")
        region_id = f"{map_id}:{i}"
        region = _cut_region(maps[map_id], point, heading, region_id, radius)
        if region is None or not region.center_lanes():
            logger.warning("trace %d on %s: no usable lanes within %.0f m, skipped",
                           i, map_id, radius)
            skipped += 1
            continue
        ego_lane = nearest_center_lane(region, (0.0, 0.0))
        entries.append(IndexEntry(region_id=region_id, region=region,
                                  abstract=abstract_map(region, ego_lane)))
    if not entries:
        raise ValidationError("no regions could be built from the trace points")
    return RegionIndex(entries=tuple(entries), skipped=skipped, radius=radius)


def rank_entries(index: RegionIndex, query: MapAbstract) -> list[tuple[float, IndexEntry]]:
    """Entries sorted by Euclidean distance to the query, ties by region_id."""
    q = np.asarray(query.to_ints(), dtype=float)
    ranked = [
        (float(np.linalg.norm(q - np.asarray(e.abstract.to_ints(), dtype=float))), e)
        for e in index.entries
    ]
    ranked.sort(key=lambda pair: (pair[0], pair[1].region_id))
    return ranked


def retrieve(index: RegionIndex, query: MapAbstract, k: int = DEFAULT_TOP_K,
             rng_seed: int = 0) -> MapRegion:
    """Uniformly sample one region from the k closest matches."""
    if not index.entries:
        raise ValidationError("region index is empty")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > len(index.entries):
        logger.warning("k=%d exceeds index size %d; clamping", k, len(index.entries))
        k = len(index.entries)
    ranked = rank_entries(index, query)
    rng = np.random.default_rng(rng_seed)
    choice = int(rng.integers(0, k))
    return ranked[choice][1].region


def save_region_index(index: RegionIndex, directory: str | Path) -> None:
    """Persist as index.json plus one map document per region."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    manifest = {
        "entry_count": len(index.entries),
        "skipped": index.skipped,
        "radius": index.radius,
        "entries": [],
    }
    for i, entry in enumerate(index.entries):
        filename = f"region_{i:04d}.json"
        doc = {
            "region_id": entry.region.region_id,
            "center": list(entry.region.center),
            "lanes": [
                {"id": l.id, "start": list(l.start), "end": list(l.end),
                 "type": l.lane_type.value, "light": l.light.value}
                for l in entry.region.lanes
            ],
        }
        (path / filename).write_text(json.dumps(doc, separators=(",", ":")))
        manifest["entries"].append({
            "region_id": entry.region_id,
            "abstract": entry.abstract.to_ints(),
            "file": filename,
        })
    (path / "index.json").write_text(json.dumps(manifest, indent=2))


def load_map_document(doc: dict, where: str = "map") -> MapRegion:
    lanes = []
    for i, lane_obj in enumerate(_field(doc, "lanes", list, where)):
        lwhere = f"{where}.lanes[{i}]"
        try:
            lane_type = LaneType(_field(lane_obj, "type", str, lwhere))
            light = LightState(_field(lane_obj, "light", str, lwhere))
        except ValueError as exc:
            raise ValidationError(f"{lwhere}: {exc}") from exc
        lanes.append(LaneSegment(
            id=_field(lane_obj, "id", int, lwhere),
            start=_point(lane_obj, "start", lwhere),
            end=_point(lane_obj, "end", lwhere),
            lane_type=lane_type,
            light=light,
        ))
    return MapRegion(lanes=tuple(lanes),
                     region_id=_field(doc, "region_id", str, where),
                     center=_point(doc, "center", where))


def load_region_index(directory: str | Path) -> RegionIndex:
    path = Path(directory)
    manifest_path = path / "index.json"
    if not manifest_path.exists():
        raise ParseError(f"no index.json under {path}")
    manifest = json.loads(manifest_path.read_text())
    entries = []
    for item in manifest["entries"]:
        doc = json.loads((path / item["file"]).read_text())
        entries.append(IndexEntry(
            region_id=item["region_id"],
            region=load_map_document(doc, where=item["file"]),
            abstract=MapAbstract.from_ints(item["abstract"]),
        ))
    if not entries:
        raise ValidationError(f"index at {path} has no entries")
    return RegionIndex(entries=tuple(entries),
                       skipped=int(manifest.get("skipped", 0)),
                       radius=float(manifest.get("radius", REGION_RADIUS)))


def load_map_dataset(directory: str | Path) -> dict[str, list[LaneSegment]]:
    """Read a directory of canonical map JSON documents into a map dataset."""
    path = Path(directory)
    maps: dict[str, list[LaneSegment]] = {}
    for file in sorted(path.glob("*.json")):
        doc = json.loads(file.read_text())
        region = load_map_document(doc, where=file.name)
        maps[region.region_id] = list(region.lanes)
    if not maps:
        raise ValidationError(f"no map documents under {path}")
    return maps


def load_trace_points(file: str | Path) -> list[TracePoint]:
    """Traces file: JSON list of {"map_id", "point": [x, y], "heading"}."""
    raw = json.loads(Path(file).read_text())
    traces = []
    for i, item in enumerate(raw):
        where = f"traces[{i}]"
        point = _point(item, "point", where)
        traces.append((
            _field(item, "map_id", str, where),
            point,
            float(_field(item, "heading", float, where)),
        ))
    return traces
