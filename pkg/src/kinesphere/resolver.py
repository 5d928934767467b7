"""Command parsing, target resolution, and trajectory generation.

A textual command names a limb, an origin, a direction, and a size.  The
resolver turns that into a partial articulation pose, possibly paired with a
base translation when the size exceeds what the databank stores or when the
command addresses the core directly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .ecl import EclStore, PartialPose, join_poses
from .errors import (
    CommandSyntaxError,
    GroundProjectionDegenerate,
    LimitViolation,
    MultipleTranslations,
    NoLocomotion,
    SizeOverflow,
    SupportMismatch,
)
from .eurdf import PlatformDescription, subtree
from .kinematics import limb_reach
from .vsam import DirectionPull, direction_vector, parse_direction

DEFAULT_DURATION_S = 2.0
DEFAULT_STEPS = 50
FALLBACK_QUANTUM_M = 0.25

_LABEL_TOKEN = re.compile(r"[A-Za-z0-9_]+")
_DIRECTION_TOKEN = re.compile(r"[A-Za-z-]+")
_INT_TOKEN = re.compile(r"\d+")


@dataclass(frozen=True)
class CommandQuery:
    limb: str
    origin: str
    direction: DirectionPull
    size: int


@dataclass(frozen=True)
class TranslationDirective:
    """Base motion in whole translation quanta along a ground direction."""

    direction: DirectionPull
    magnitude: int
    quantum_m: float


@dataclass(frozen=True)
class ResolvedTarget:
    articulation: PartialPose
    translation: Optional[TranslationDirective] = None


@dataclass(frozen=True)
class TrajectoryStep:
    t: float
    pose: tuple
    base_offset: tuple[float, float, float]


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[TrajectoryStep, ...]
    duration: float

    @property
    def goal(self) -> tuple:
        return self.steps[-1].pose


class _Scanner:
    def __init__(self, text: str, line: int):
        self.text = text
        self.line = line
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    @property
    def column(self) -> int:
        return self.pos + 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect(self, literal: str):
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise CommandSyntaxError(
                f"expected {literal!r}", line=self.line, column=self.column
            )
        self.pos += len(literal)

    def take(self, pattern: re.Pattern, what: str) -> tuple[str, int]:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if m is None:
            raise CommandSyntaxError(
                f"expected {what}", line=self.line, column=self.column
            )
        start_col = self.column
        self.pos = m.end()
        return m.group(), start_col


def _parse_one(scanner: _Scanner) -> CommandQuery:
    limb, _ = scanner.take(_LABEL_TOKEN, "a limb label")
    scanner.expect("@")
    origin, _ = scanner.take(_LABEL_TOKEN, "an origin label")
    scanner.expect("->")
    dname, _ = scanner.take(_DIRECTION_TOKEN, "a direction name")
    direction = parse_direction(dname)
    scanner.expect("*")
    stext, scol = scanner.take(_INT_TOKEN, "a size")
    size = int(stext)
    if size < 1:
        raise CommandSyntaxError(
            "size must be at least 1", line=scanner.line, column=scol
        )
    return CommandQuery(limb=limb, origin=origin, direction=direction, size=size)


def parse_command(text: str, line: int = 1
                  ) -> Union[CommandQuery, tuple[CommandQuery, ...]]:
    """One command line; `&` joins several into a compound.

    Labels are validated at resolve time; direction names immediately.
    """
    body = text.split("#", 1)[0]
    scanner = _Scanner(body, line)
    commands = [_parse_one(scanner)]
    while not scanner.at_end():
        scanner.expect("&")
        commands.append(_parse_one(scanner))
    if len(commands) == 1:
        return commands[0]
    return tuple(commands)


def format_command(cmd) -> str:
    """Inverse of parse_command for one query or a compound of them."""
    if isinstance(cmd, tuple):
        return " & ".join(format_command(c) for c in cmd)
    return f"{cmd.limb} @ {cmd.origin} -> {cmd.direction.name} * {cmd.size}"


def parse_command_file(text: str) -> list:
    """All commands in a script, one entry per non-empty line."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        out.append(parse_command(body, line=lineno))
    return out


def translation_quantum(platform: PlatformDescription,
                        limb: Optional[str] = None) -> float:
    """Meters per translation step: the platform file's value when given,
    else the commanding limb's reach, else a fixed fallback."""
    if platform.translation_quantum is not None:
        return platform.translation_quantum
    if limb is not None:
        reach = limb_reach(platform, limb)
        if reach > 0.0:
            return reach
    return FALLBACK_QUANTUM_M


def _empty_pose(m: int) -> PartialPose:
    return PartialPose(values=(None,) * m)


def _neutral_over_support(platform: PlatformDescription, label: str) -> PartialPose:
    jspace = platform.joint_space
    neutral = platform.neutral_pose()
    values: list = [None] * jspace.m
    for joint_id in subtree(platform, label).joints:
        i = jspace.index_of[joint_id]
        values[i] = neutral[i]
    return PartialPose(values=tuple(values))


def _project_for_base(platform: PlatformDescription,
                      direction: DirectionPull) -> DirectionPull:
    if not platform.mobile:
        raise NoLocomotion(
            f"platform {platform.name!r} has no locomotion mode"
        )
    projected = direction.ground_projected()
    if projected.is_place_middle:
        raise GroundProjectionDegenerate(
            f"{direction.name!r} has no ground component to translate along"
        )
    return projected


def resolve(store: EclStore, platform: PlatformDescription, cmd: CommandQuery,
            current: Sequence[float]) -> ResolvedTarget:
    """Turn one command into an articulation target and optional base motion.

    Sizes beyond the stored kmax articulate to the largest stored pose and
    push the remainder into whole translation quanta along the ground
    projection of the commanded direction.
    """
    jspace = platform.joint_space
    if len(current) != jspace.m:
        raise SupportMismatch(
            f"current pose length {len(current)} != joint space size {jspace.m}"
        )
    if cmd.direction.is_place_middle:
        return ResolvedTarget(
            articulation=_neutral_over_support(platform, cmd.limb)
        )
    if cmd.limb in platform.labels.core:
        projected = _project_for_base(platform, cmd.direction)
        return ResolvedTarget(
            articulation=_empty_pose(jspace.m),
            translation=TranslationDirective(
                direction=projected,
                magnitude=cmd.size,
                quantum_m=translation_quantum(platform),
            ),
        )
    try:
        pose = store.query(cmd.limb, cmd.origin, cmd.direction, cmd.size)
        return ResolvedTarget(articulation=pose)
    except SizeOverflow as overflow:
        kmax = overflow.kmax
        projected = _project_for_base(platform, cmd.direction)
        if kmax >= 1:
            articulation = store.query(cmd.limb, cmd.origin, cmd.direction, kmax)
        else:
            articulation = _empty_pose(jspace.m)
        return ResolvedTarget(
            articulation=articulation,
            translation=TranslationDirective(
                direction=projected,
                magnitude=cmd.size - kmax,
                quantum_m=translation_quantum(platform, cmd.limb),
            ),
        )


def overlay(current: Sequence[float], partial: PartialPose,
            platform: Optional[PlatformDescription] = None) -> tuple:
    """Full pose taking the partial's value wherever it binds one."""
    values = partial.values
    if len(current) != len(values):
        raise SupportMismatch(
            f"pose lengths differ: {len(current)} != {len(values)}"
        )
    merged = tuple(
        float(current[i]) if v is None else float(v)
        for i, v in enumerate(values)
    )
    if platform is not None:
        _check_limits(platform, merged)
    return merged


def _check_limits(platform: PlatformDescription, pose: Sequence[float]):
    for dim, v in zip(platform.joint_space.dims, pose):
        if not dim.limit_min <= v <= dim.limit_max:
            raise LimitViolation(
                f"{dim.joint_id}: {v} outside [{dim.limit_min}, {dim.limit_max}]"
            )


def compose(store: EclStore, platform: PlatformDescription,
            cmds: Sequence[CommandQuery],
            current: Sequence[float]) -> ResolvedTarget:
    """Resolve several commands into one compound target.

    Articulations join; identical translation directives merge, differing
    ones conflict since the base can move only one way.
    """
    if not cmds:
        raise ValueError("compose needs at least one command")
    targets = [resolve(store, platform, c, current) for c in cmds]
    joined = join_poses(
        [t.articulation for t in targets], joint_space=platform.joint_space
    )
    translation: Optional[TranslationDirective] = None
    for target in targets:
        if target.translation is None:
            continue
        if translation is None:
            translation = target.translation
        elif target.translation != translation:
            raise MultipleTranslations(
                f"conflicting base motions: {translation} vs {target.translation}"
            )
    return ResolvedTarget(articulation=joined, translation=translation)


def interpolate(platform: PlatformDescription, start: Sequence[float],
                target: ResolvedTarget, steps: int = DEFAULT_STEPS,
                duration: float = DEFAULT_DURATION_S) -> Trajectory:
    """Linear joint-space path from start to the target applied over start.

    Endpoints are exact; intermediate joint values are clamped to limits to
    absorb rounding.  Base offset grows linearly to the full translation.
    """
    if steps < 2:
        raise ValueError(f"steps must be at least 2, got {steps}")
    if duration <= 0.0:
        raise ValueError(f"duration must be positive, got {duration}")
    start = tuple(float(v) for v in start)
    _check_limits(platform, start)
    goal = overlay(start, target.articulation, platform)
    if target.translation is not None:
        d = target.translation
        base_goal = (
            direction_vector(d.direction) * (d.magnitude * d.quantum_m)
        )
    else:
        base_goal = np.zeros(3)
    dims = platform.joint_space.dims
    out = []
    for i in range(steps):
        tau = i / (steps - 1)
        t = tau * duration
        if i == 0:
            pose = start
        elif i == steps - 1:
            pose = goal
        else:
            pose = tuple(
                min(max((1.0 - tau) * s + tau * g, dim.limit_min), dim.limit_max)
                for s, g, dim in zip(start, goal, dims)
            )
        base = tau * base_goal
        out.append(TrajectoryStep(
            t=t, pose=pose,
            base_offset=(float(base[0]), float(base[1]), float(base[2])),
        ))
    return Trajectory(steps=tuple(out), duration=duration)
