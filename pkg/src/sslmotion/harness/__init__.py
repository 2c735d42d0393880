"""Deterministic scenario simulator, foul detection, and the CLI."""

from .scenario import (
    RefereeEvent,
    RobotSpec,
    Scenario,
    ScenarioError,
    VisionConfig,
    load_scenario,
    parse_scenario,
)
from .sim import (
    FoulDetector,
    FoulEvent,
    RobotReport,
    SimReport,
    format_report,
    format_trace,
    plant_step,
    run,
)

__all__ = [
    "RefereeEvent",
    "RobotSpec",
    "Scenario",
    "ScenarioError",
    "VisionConfig",
    "load_scenario",
    "parse_scenario",
    "FoulDetector",
    "FoulEvent",
    "RobotReport",
    "SimReport",
    "format_report",
    "format_trace",
    "plant_step",
    "run",
]
