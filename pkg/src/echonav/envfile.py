"""JSON scene files: bounds, materials, obstacle segments, optional start pose and regions.

Schema (all lengths in metres)::

    {
      "name": "office",
      "bounds": [xmin, ymin, xmax, ymax],
      "materials": {"name": {"reflectivity": 1.0, "optical_kind": "glass", "softness": 0.0}},
      "segments": [{"x1": 0, "y1": 0, "x2": 1, "y2": 0, "material": "concrete"}],
      "boxes": [{"x": 1, "y": 1, "w": 0.8, "h": 0.4, "material": "wood"}],
      "start": {"x": 1.0, "y": 1.0, "heading_deg": 0.0},
      "regions": [{"name": "glass", "x_min": 4.6, "x_max": 5.4}]
    }

``material`` is either the name of a built-in / file-local material or an
inline ``{reflectivity, optical_kind, softness}`` object. ``boxes`` expand to
four segments each.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .acoustics import MATERIALS, Environment, Material, Segment
from .sim import DroneState


class SceneError(ValueError):
    """Malformed scene file."""


@dataclass(frozen=True)
class Region:
    name: str
    x_min: float
    x_max: float


@dataclass(frozen=True)
class Scene:
    env: Environment
    name: str = ""
    start: DroneState | None = None
    regions: tuple[Region, ...] = ()
    source: str | None = None
    materials: dict = field(default_factory=dict, compare=False)


def _material(spec, table: dict, where: str) -> Material:
    if isinstance(spec, str):
        if spec not in table:
            raise SceneError(f"{where}: unknown material {spec!r}")
        return table[spec]
    if isinstance(spec, dict):
        try:
            return Material(
                float(spec.get("reflectivity", 1.0)),
                spec.get("optical_kind", "diffuse"),
                float(spec.get("softness", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            raise SceneError(f"{where}: {exc}") from exc
    raise SceneError(f"{where}: material must be a name or an object")


def _box_segments(box: dict, material: Material) -> list[Segment]:
    x, y, w, h = (float(box[k]) for k in ("x", "y", "w", "h"))
    corners = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)]
    return [Segment(corners[i], corners[(i + 1) % 4], material) for i in range(4)]


def scene_from_dict(data: dict, source: str | None = None) -> Scene:
    where = source or "<scene>"
    if not isinstance(data, dict):
        raise SceneError(f"{where}: top level must be an object")
    if "bounds" not in data:
        raise SceneError(f"{where}: missing 'bounds'")
    table = dict(MATERIALS)
    for name, spec in data.get("materials", {}).items():
        table[name] = _material(spec, table, f"{where}: materials.{name}")

    segments = []
    try:
        for k, seg in enumerate(data.get("segments", [])):
            mat = _material(seg.get("material", "concrete"), table, f"{where}: segments[{k}]")
            segments.append(
                Segment((float(seg["x1"]), float(seg["y1"])), (float(seg["x2"]), float(seg["y2"])), mat)
            )
        for k, box in enumerate(data.get("boxes", [])):
            mat = _material(box.get("material", "concrete"), table, f"{where}: boxes[{k}]")
            segments.extend(_box_segments(box, mat))
        env = Environment(tuple(segments), tuple(data["bounds"]))
    except KeyError as exc:
        raise SceneError(f"{where}: missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise SceneError(f"{where}: {exc}") from exc

    start = None
    if "start" in data:
        s = data["start"]
        try:
            start = DroneState((float(s["x"]), float(s["y"])), math.radians(float(s.get("heading_deg", 0.0))))
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneError(f"{where}: bad start pose: {exc}") from exc
        if not env.contains(start.position):
            raise SceneError(f"{where}: start pose outside bounds")

    regions = tuple(
        Region(str(r["name"]), float(r["x_min"]), float(r["x_max"])) for r in data.get("regions", [])
    )
    return Scene(env, str(data.get("name", "")), start, regions, source, table)


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise SceneError(f"{path}: cannot read scene file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path}: invalid JSON: {exc}") from exc
    return scene_from_dict(data, str(path))


def scene_to_dict(scene: Scene) -> dict:
    """Expanded form: boxes become plain segments, materials are inlined."""
    out = {"name": scene.name, "bounds": list(scene.env.bounds), "segments": []}
    for seg in scene.env.segments:
        m = seg.material
        out["segments"].append(
            {
                "x1": seg.p1[0],
                "y1": seg.p1[1],
                "x2": seg.p2[0],
                "y2": seg.p2[1],
                "material": {"reflectivity": m.reflectivity, "optical_kind": m.optical_kind, "softness": m.softness},
            }
        )
    if scene.start is not None:
        out["start"] = {
            "x": scene.start.position[0],
            "y": scene.start.position[1],
            "heading_deg": math.degrees(scene.start.heading),
        }
    if scene.regions:
        out["regions"] = [{"name": r.name, "x_min": r.x_min, "x_max": r.x_max} for r in scene.regions]
    return out


def bundled_scene_path(name: str) -> Path:
    from importlib import resources

    path = Path(str(resources.files("echonav").joinpath("data").joinpath(f"{name}.json")))
    if not path.exists():
        raise SceneError(f"no bundled scene named {name!r}")
    return path


def resolve_scene(ref) -> Scene:
    """Load a scene from a path, or from the bundled data directory by bare name."""
    path = Path(ref)
    if path.exists():
        return load_scene(path)
    return load_scene(bundled_scene_path(str(ref)))
