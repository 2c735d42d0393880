"""Referee command stream to game-state leaves.

Three questions, asked in order, pick exactly one leaf for every input:
does the game demand a full stop (halt, timeouts, dead stages); if not, are
we positioning rather than playing (stop, placements, restart preparation);
and if we are in motion, is a rehearsed restart of ours running or is this
open play. The mapping is a total function of (command, stage, ball_moved,
previous leaf); the previous leaf only matters when NormalStart has to be
read in the context of whatever was being prepared.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Tuple, Union


class Command(Enum):
    HALT = "HALT"
    STOP = "STOP"
    NORMAL_START = "NORMAL_START"
    FORCE_START = "FORCE_START"
    PREPARE_KICKOFF_US = "PREPARE_KICKOFF_US"
    PREPARE_KICKOFF_THEM = "PREPARE_KICKOFF_THEM"
    PREPARE_PENALTY_US = "PREPARE_PENALTY_US"
    PREPARE_PENALTY_THEM = "PREPARE_PENALTY_THEM"
    DIRECT_FREE_US = "DIRECT_FREE_US"
    DIRECT_FREE_THEM = "DIRECT_FREE_THEM"
    BALL_PLACEMENT_US = "BALL_PLACEMENT_US"
    BALL_PLACEMENT_THEM = "BALL_PLACEMENT_THEM"
    TIMEOUT_US = "TIMEOUT_US"
    TIMEOUT_THEM = "TIMEOUT_THEM"


class Stage(Enum):
    FIRST_HALF_PRE = "FIRST_HALF_PRE"
    FIRST_HALF = "FIRST_HALF"
    HALF_TIME = "HALF_TIME"
    SECOND_HALF_PRE = "SECOND_HALF_PRE"
    SECOND_HALF = "SECOND_HALF"
    OVERTIME_PRE = "OVERTIME_PRE"
    OVERTIME_FIRST_HALF = "OVERTIME_FIRST_HALF"
    OVERTIME_SECOND_HALF = "OVERTIME_SECOND_HALF"
    PENALTY_SHOOTOUT = "PENALTY_SHOOTOUT"
    POST_GAME = "POST_GAME"


# stages where no play happens regardless of the last command seen
_DEAD_STAGES = frozenset({Stage.HALF_TIME, Stage.POST_GAME})


class FormationReason(Enum):
    STOP = "stop"
    BALL_PLACEMENT_US = "ball_placement_us"
    BALL_PLACEMENT_THEM = "ball_placement_them"
    PREPARE_KICKOFF_US = "prepare_kickoff_us"
    PREPARE_KICKOFF_THEM = "prepare_kickoff_them"
    PREPARE_PENALTY_US = "prepare_penalty_us"
    PREPARE_PENALTY_THEM = "prepare_penalty_them"
    THEIR_FREE_KICK = "their_free_kick"


class PlannedPlay(Enum):
    KICKOFF_US = "kickoff_us"
    PENALTY_US = "penalty_us"
    FREE_KICK_US = "free_kick_us"


class TacticMode(Enum):
    NORMAL = "normal"
    THEIR_RESTART_AVOIDANCE = "their_restart_avoidance"


@dataclass(frozen=True, slots=True)
class Halt:
    def tag(self) -> str:
        return "Halt"


@dataclass(frozen=True, slots=True)
class DynamicFormation:
    reason: FormationReason

    def tag(self) -> str:
        return f"DynamicFormation{{{self.reason.value}}}"


@dataclass(frozen=True, slots=True)
class PlannedTactic:
    play: PlannedPlay

    def tag(self) -> str:
        return f"PlannedTactic{{{self.play.value}}}"


@dataclass(frozen=True, slots=True)
class GameTactic:
    mode: TacticMode

    def tag(self) -> str:
        return f"GameTactic{{{self.mode.value}}}"


GameStateLeaf = Union[Halt, DynamicFormation, PlannedTactic, GameTactic]


@dataclass(frozen=True, slots=True)
class RefereeInput:
    command: Command
    stage: Stage
    ball_moved: bool = False  # ball left its restart spot
    we_are_team: str = "blue"


@dataclass(frozen=True, slots=True)
class GameConstraints:
    """Motion restrictions implied by a leaf. None means unrestricted."""

    speed_cap: Optional[float]  # m/s
    ball_keepout: Optional[float]  # m, min distance to the ball
    may_touch_ball: bool
    defense_keepout_active: bool


STOP_SPEED_CAP = 1.5  # m/s, league positioning speed limit
STOP_BALL_KEEPOUT = 0.5  # m, league kick-point clearance


_PREPARE_REASONS = {
    Command.PREPARE_KICKOFF_US: FormationReason.PREPARE_KICKOFF_US,
    Command.PREPARE_KICKOFF_THEM: FormationReason.PREPARE_KICKOFF_THEM,
    Command.PREPARE_PENALTY_US: FormationReason.PREPARE_PENALTY_US,
    Command.PREPARE_PENALTY_THEM: FormationReason.PREPARE_PENALTY_THEM,
    Command.BALL_PLACEMENT_US: FormationReason.BALL_PLACEMENT_US,
    Command.BALL_PLACEMENT_THEM: FormationReason.BALL_PLACEMENT_THEM,
}

# what NormalStart launches, per prepared restart of ours
_PREPARED_PLAYS = {
    FormationReason.PREPARE_KICKOFF_US: PlannedPlay.KICKOFF_US,
    FormationReason.PREPARE_PENALTY_US: PlannedPlay.PENALTY_US,
}

# their prepared restarts: NormalStart releases them, we stay reactive
_THEIR_PREPARED = frozenset({
    FormationReason.PREPARE_KICKOFF_THEM,
    FormationReason.PREPARE_PENALTY_THEM,
    FormationReason.THEIR_FREE_KICK,
})


def parse(inp: RefereeInput,
          previous: Optional[GameStateLeaf] = None) -> GameStateLeaf:
    """Map a referee input (plus the previous leaf) to exactly one leaf."""
    cmd = inp.command

    # full-stop level: halt and timeouts dominate everything
    if cmd in (Command.HALT, Command.TIMEOUT_US, Command.TIMEOUT_THEM):
        return Halt()
    if inp.stage in _DEAD_STAGES:
        return Halt()

    # positioning level
    if cmd is Command.STOP:
        return DynamicFormation(FormationReason.STOP)
    if cmd in _PREPARE_REASONS:
        return DynamicFormation(_PREPARE_REASONS[cmd])
    if cmd is Command.DIRECT_FREE_THEM:
        if inp.ball_moved:
            return GameTactic(TacticMode.THEIR_RESTART_AVOIDANCE)
        return DynamicFormation(FormationReason.THEIR_FREE_KICK)

    # in-motion level
    if cmd is Command.FORCE_START:
        return GameTactic(TacticMode.NORMAL)
    if cmd is Command.DIRECT_FREE_US:
        if inp.ball_moved:
            return GameTactic(TacticMode.NORMAL)
        return PlannedTactic(PlannedPlay.FREE_KICK_US)
    if cmd is Command.NORMAL_START:
        return _parse_normal_start(inp, previous)

    raise AssertionError(f"unhandled command {cmd!r}")


def _parse_normal_start(inp: RefereeInput,
                        previous: Optional[GameStateLeaf]) -> GameStateLeaf:
    if isinstance(previous, DynamicFormation):
        if previous.reason in _PREPARED_PLAYS:
            if inp.ball_moved:
                return GameTactic(TacticMode.NORMAL)
            return PlannedTactic(_PREPARED_PLAYS[previous.reason])
        if previous.reason in _THEIR_PREPARED:
            return GameTactic(TacticMode.THEIR_RESTART_AVOIDANCE)
        return GameTactic(TacticMode.NORMAL)
    if isinstance(previous, PlannedTactic):
        if inp.ball_moved:
            return GameTactic(TacticMode.NORMAL)
        return previous
    if isinstance(previous, GameTactic):
        return previous
    # no usable context (fresh boot or halt): treat as open play
    return GameTactic(TacticMode.NORMAL)


def constraints_for(leaf: GameStateLeaf,
                    stop_speed_cap: float = STOP_SPEED_CAP,
                    stop_ball_keepout: float = STOP_BALL_KEEPOUT,
                    ) -> GameConstraints:
    """Motion restrictions a leaf imposes on every non-goalkeeper robot."""
    if isinstance(leaf, Halt):
        return GameConstraints(speed_cap=0.0, ball_keepout=None,
                               may_touch_ball=False,
                               defense_keepout_active=True)
    if isinstance(leaf, DynamicFormation):
        return GameConstraints(speed_cap=stop_speed_cap,
                               ball_keepout=stop_ball_keepout,
                               may_touch_ball=False,
                               defense_keepout_active=True)
    if isinstance(leaf, (PlannedTactic, GameTactic)):
        return GameConstraints(speed_cap=None, ball_keepout=None,
                               may_touch_ball=True,
                               defense_keepout_active=True)
    raise TypeError(f"unknown leaf type {type(leaf).__name__}")


# --- referee log replay -----------------------------------------------------


def parse_log_line(line: str, lineno: int = 0) -> Tuple[float, RefereeInput]:
    """One event: `t command stage ball_moved` separated by whitespace."""
    parts = line.split()
    if len(parts) != 4:
        raise ValueError(
            f"line {lineno}: expected 't command stage ball_moved', "
            f"got {len(parts)} fields")
    try:
        t = float(parts[0])
    except ValueError:
        raise ValueError(f"line {lineno}: bad timestamp {parts[0]!r}") from None
    try:
        cmd = Command(parts[1])
    except ValueError:
        raise ValueError(f"line {lineno}: unknown command {parts[1]!r}") from None
    try:
        stage = Stage(parts[2])
    except ValueError:
        raise ValueError(f"line {lineno}: unknown stage {parts[2]!r}") from None
    flag = parts[3].lower()
    if flag not in ("true", "false", "1", "0"):
        raise ValueError(f"line {lineno}: bad ball_moved flag {parts[3]!r}")
    return t, RefereeInput(cmd, stage, flag in ("true", "1"))


def replay_log(lines: Iterable[str]) -> List[Tuple[float, GameStateLeaf]]:
    """Run the parser over a referee event log, producing the leaf timeline."""
    timeline: List[Tuple[float, GameStateLeaf]] = []
    previous: Optional[GameStateLeaf] = None
    last_t = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        t, inp = parse_log_line(line, lineno)
        if last_t is not None and t < last_t:
            raise ValueError(f"line {lineno}: timestamps must be ordered")
        last_t = t
        previous = parse(inp, previous)
        timeline.append((t, previous))
    return timeline
