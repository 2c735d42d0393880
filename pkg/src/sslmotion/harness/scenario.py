"""Scenario files: schema, validation, and loading.

Scenarios are YAML documents. Every key is checked; unknown keys and wrong
types raise ScenarioError naming the full field path, so a typo in a
checked-in scenario fails loudly instead of silently changing the run.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

import yaml

from ..refparser import Command, RefereeInput, Stage
from ..worldmodel import (FieldGeometry, KeepOutDisc, MotionLimits,
                          MovingDisc, Obstacle, Rect, RobotState, StaticDisc,
                          Vec2)


class ScenarioError(ValueError):
    """Malformed scenario content; message carries the offending field path."""


@dataclass(frozen=True, slots=True)
class VisionConfig:
    rate_hz: float = 60.0
    latency_s: float = 0.1

    def __post_init__(self):
        if self.rate_hz <= 0.0:
            raise ScenarioError("vision.rate_hz: must be > 0")
        if self.latency_s < 0.0:
            raise ScenarioError("vision.latency_s: must be >= 0")


@dataclass(frozen=True, slots=True)
class RobotSpec:
    id: int
    start: RobotState
    target: Vec2
    target_heading: float
    limits: MotionLimits
    goalkeeper: bool = False


@dataclass(frozen=True, slots=True)
class RefereeEvent:
    t: float
    input: RefereeInput


@dataclass(frozen=True, slots=True)
class Scenario:
    name: str
    seed: int
    duration_s: float
    field: FieldGeometry
    vision: VisionConfig
    robots: Tuple[RobotSpec, ...]
    obstacles: Tuple[Obstacle, ...] = ()
    referee: Tuple[RefereeEvent, ...] = ()
    ball: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))
    defense_areas: bool = True  # include defense rects as planner keep-outs

    def __post_init__(self):
        if self.duration_s <= 0.0:
            raise ScenarioError("duration: must be > 0")
        if not self.robots:
            raise ScenarioError("robots: at least one robot required")
        ids = [r.id for r in self.robots]
        if len(set(ids)) != len(ids):
            raise ScenarioError("robots: ids must be unique")
        last = -1.0
        for i, ev in enumerate(self.referee):
            if ev.t < last:
                raise ScenarioError(
                    f"referee[{i}].t: events must be time-ordered")
            last = ev.t


def _want_map(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ScenarioError(f"{path}: expected a mapping")
    return node


def _want_list(node, path: str) -> list:
    if not isinstance(node, list):
        raise ScenarioError(f"{path}: expected a list")
    return node


def _num(node: dict, key: str, path: str, default=None) -> float:
    if key not in node:
        if default is not None:
            return default
        raise ScenarioError(f"{path}.{key}: required")
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number")
    return float(v)


def _integer(node: dict, key: str, path: str, default=None) -> int:
    if key not in node:
        if default is not None:
            return default
        raise ScenarioError(f"{path}.{key}: required")
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{path}.{key}: expected an integer")
    return v


def _flag(node: dict, key: str, path: str, default: bool) -> bool:
    if key not in node:
        return default
    v = node[key]
    if not isinstance(v, bool):
        raise ScenarioError(f"{path}.{key}: expected true/false")
    return v


def _no_extra_keys(node: dict, allowed: set, path: str) -> None:
    extra = sorted(set(node) - allowed)
    if extra:
        raise ScenarioError(f"{path}: unknown keys {', '.join(extra)}")


def _parse_limits(node, path: str) -> MotionLimits:
    node = _want_map(node, path)
    _no_extra_keys(node, {"v_max", "a_max", "omega_max", "alpha_max"}, path)
    try:
        return MotionLimits(
            v_max=_num(node, "v_max", path),
            a_max=_num(node, "a_max", path),
            omega_max=_num(node, "omega_max", path, 10.0),
            alpha_max=_num(node, "alpha_max", path, 30.0))
    except ValueError as e:
        raise ScenarioError(f"{path}: {e}") from None


def _parse_robot(node, path: str, default_limits: Optional[MotionLimits],
                 ) -> RobotSpec:
    node = _want_map(node, path)
    _no_extra_keys(node, {"id", "start", "target", "limits", "goalkeeper"},
                   path)
    rid = _integer(node, "id", path)
    if "start" not in node:
        raise ScenarioError(f"{path}.start: required")
    s = _want_map(node["start"], f"{path}.start")
    _no_extra_keys(s, {"x", "y", "heading", "vx", "vy"}, f"{path}.start")
    start = RobotState(
        Vec2(_num(s, "x", f"{path}.start"), _num(s, "y", f"{path}.start")),
        Vec2(_num(s, "vx", f"{path}.start", 0.0),
             _num(s, "vy", f"{path}.start", 0.0)),
        _num(s, "heading", f"{path}.start", 0.0))
    if "target" not in node:
        raise ScenarioError(f"{path}.target: required")
    tg = _want_map(node["target"], f"{path}.target")
    _no_extra_keys(tg, {"x", "y", "heading"}, f"{path}.target")
    target = Vec2(_num(tg, "x", f"{path}.target"),
                  _num(tg, "y", f"{path}.target"))
    target_heading = _num(tg, "heading", f"{path}.target", 0.0)
    if "limits" in node:
        limits = _parse_limits(node["limits"], f"{path}.limits")
    elif default_limits is not None:
        limits = default_limits
    else:
        raise ScenarioError(
            f"{path}.limits: required (no scenario-level limits given)")
    return RobotSpec(rid, start, target, target_heading, limits,
                     _flag(node, "goalkeeper", path, False))


_OBSTACLE_KEYS = {
    "disc": {"kind", "x", "y", "radius"},
    "moving_disc": {"kind", "x", "y", "radius", "vx", "vy", "horizon"},
    "rect": {"kind", "lo_x", "lo_y", "hi_x", "hi_y"},
    "keepout": {"kind", "x", "y", "radius", "active"},
}


def _parse_obstacle(node, path: str) -> Obstacle:
    node = _want_map(node, path)
    kind = node.get("kind")
    if kind not in _OBSTACLE_KEYS:
        raise ScenarioError(
            f"{path}.kind: expected one of {sorted(_OBSTACLE_KEYS)}")
    _no_extra_keys(node, _OBSTACLE_KEYS[kind], path)
    try:
        if kind == "disc":
            return StaticDisc(Vec2(_num(node, "x", path), _num(node, "y", path)),
                              _num(node, "radius", path))
        if kind == "moving_disc":
            return MovingDisc(
                Vec2(_num(node, "x", path), _num(node, "y", path)),
                _num(node, "radius", path),
                Vec2(_num(node, "vx", path), _num(node, "vy", path)),
                _num(node, "horizon", path, 1.0))
        if kind == "rect":
            return Rect(Vec2(_num(node, "lo_x", path), _num(node, "lo_y", path)),
                        Vec2(_num(node, "hi_x", path), _num(node, "hi_y", path)))
        return KeepOutDisc(Vec2(_num(node, "x", path), _num(node, "y", path)),
                           _num(node, "radius", path),
                           _flag(node, "active", path, True))
    except ValueError as e:
        raise ScenarioError(f"{path}: {e}") from None


def _parse_referee_event(node, path: str) -> RefereeEvent:
    node = _want_map(node, path)
    _no_extra_keys(node, {"t", "command", "stage", "ball_moved"}, path)
    t = _num(node, "t", path)
    cmd_name = node.get("command")
    if not isinstance(cmd_name, str) or cmd_name not in Command.__members__:
        raise ScenarioError(f"{path}.command: expected a referee command name")
    stage_name = node.get("stage", "FIRST_HALF")
    if not isinstance(stage_name, str) or stage_name not in Stage.__members__:
        raise ScenarioError(f"{path}.stage: expected a stage name")
    return RefereeEvent(t, RefereeInput(
        Command[cmd_name], Stage[stage_name],
        _flag(node, "ball_moved", path, False)))


def parse_scenario(doc, name: str = "scenario") -> Scenario:
    """Validate a parsed YAML document into a Scenario."""
    doc = _want_map(doc, name)
    _no_extra_keys(doc, {"name", "seed", "duration", "field", "vision",
                         "ball", "limits", "robots", "obstacles", "referee",
                         "defense_areas"}, name)
    sc_name = doc.get("name", name)
    if not isinstance(sc_name, str):
        raise ScenarioError("name: expected a string")

    fld = FieldGeometry()
    if "field" in doc:
        f = _want_map(doc["field"], "field")
        _no_extra_keys(f, {"length", "width", "defense_depth",
                           "defense_width", "boundary_margin"}, "field")
        try:
            fld = FieldGeometry(
                length=_num(f, "length", "field", 9.0),
                width=_num(f, "width", "field", 6.0),
                defense_area_depth=_num(f, "defense_depth", "field", 1.0),
                defense_area_width=_num(f, "defense_width", "field", 2.0),
                boundary_margin=_num(f, "boundary_margin", "field", 0.3))
        except ValueError as e:
            raise ScenarioError(f"field: {e}") from None

    vision = VisionConfig()
    if "vision" in doc:
        v = _want_map(doc["vision"], "vision")
        _no_extra_keys(v, {"rate_hz", "latency_s"}, "vision")
        vision = VisionConfig(_num(v, "rate_hz", "vision", 60.0),
                              _num(v, "latency_s", "vision", 0.1))

    ball = Vec2(0.0, 0.0)
    if "ball" in doc:
        b = _want_map(doc["ball"], "ball")
        _no_extra_keys(b, {"x", "y"}, "ball")
        ball = Vec2(_num(b, "x", "ball"), _num(b, "y", "ball"))

    default_limits = (_parse_limits(doc["limits"], "limits")
                      if "limits" in doc else None)

    robots = tuple(
        _parse_robot(r, f"robots[{i}]", default_limits)
        for i, r in enumerate(_want_list(doc.get("robots", []), "robots")))
    obstacles = tuple(
        _parse_obstacle(o, f"obstacles[{i}]")
        for i, o in enumerate(_want_list(doc.get("obstacles", []),
                                         "obstacles")))
    referee = tuple(
        _parse_referee_event(e, f"referee[{i}]")
        for i, e in enumerate(_want_list(doc.get("referee", []), "referee")))

    return Scenario(
        name=sc_name,
        seed=_integer(doc, "seed", name, 0),
        duration_s=_num(doc, "duration", name),
        field=fld,
        vision=vision,
        robots=robots,
        obstacles=obstacles,
        referee=referee,
        ball=ball,
        defense_areas=_flag(doc, "defense_areas", name, True))


def load_scenario(path: str) -> Scenario:
    """Load and validate a scenario YAML file."""
    with open(path, "r", encoding="utf-8") as fp:
        try:
            doc = yaml.safe_load(fp)
        except yaml.YAMLError as e:
            raise ScenarioError(f"{path}: not valid YAML: {e}") from None
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_scenario(doc, name)
