"""Direction vocabulary and the access-model contract around a platform.

A direction pull is a point of the {-1, 0, +1}^3 lattice in the body frame
(x = left, y = forward, z = high).  The all-zero triple is the resting name
"place-middle" and never appears in a stored vocabulary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidSizeCount, UnknownDirectionName, UnknownOrigin, ZeroDirection

_LATERAL = {1: "left", -1: "right"}
_SAGITTAL = {1: "forward", -1: "back"}
_LEVEL = {1: "high", 0: "middle", -1: "low"}

_WORD_LATERAL = {v: k for k, v in _LATERAL.items()}
_WORD_SAGITTAL = {v: k for k, v in _SAGITTAL.items()}
_WORD_LEVEL = {v: k for k, v in _LEVEL.items()}


@dataclass(frozen=True, order=True)
class DirectionPull:
    """One spatial pull; components are each -1, 0 or +1."""

    lateral: int
    sagittal: int
    vertical: int

    def __post_init__(self):
        for c in (self.lateral, self.sagittal, self.vertical):
            if c not in (-1, 0, 1):
                raise ValueError(f"direction component out of range: {c}")

    @property
    def name(self) -> str:
        parts = []
        if self.lateral:
            parts.append(_LATERAL[self.lateral])
        if self.sagittal:
            parts.append(_SAGITTAL[self.sagittal])
        if not parts:
            parts.append("place")
        parts.append(_LEVEL[self.vertical])
        return "-".join(parts)

    @property
    def is_place_middle(self) -> bool:
        return self.lateral == 0 and self.sagittal == 0 and self.vertical == 0

    def negated(self) -> "DirectionPull":
        return DirectionPull(-self.lateral, -self.sagittal, -self.vertical)

    def ground_projected(self) -> "DirectionPull":
        """Same pull with the vertical component dropped."""
        return DirectionPull(self.lateral, self.sagittal, 0)


PLACE_MIDDLE = DirectionPull(0, 0, 0)


def parse_direction(name: str) -> DirectionPull:
    """Inverse of DirectionPull.name."""
    words = name.strip().split("-")
    lat = sag = 0
    level: Optional[int] = None
    seen_place = False
    for i, w in enumerate(words):
        if w in _WORD_LATERAL and i == 0 and lat == 0:
            lat = _WORD_LATERAL[w]
        elif w in _WORD_SAGITTAL and sag == 0 and level is None:
            sag = _WORD_SAGITTAL[w]
        elif w in _WORD_LEVEL and level is None and i == len(words) - 1:
            level = _WORD_LEVEL[w]
        elif w == "place" and i == 0 and len(words) == 2:
            seen_place = True
        else:
            raise UnknownDirectionName(f"unknown direction name: {name!r}")
    if level is None:
        raise UnknownDirectionName(f"unknown direction name: {name!r}")
    if seen_place and (lat or sag):
        raise UnknownDirectionName(f"unknown direction name: {name!r}")
    return DirectionPull(lat, sag, level)


def laban26() -> tuple[DirectionPull, ...]:
    """The 26 pulls of the full spatial scale, place-middle excluded."""
    out = []
    for lat in (1, 0, -1):
        for sag in (1, 0, -1):
            for vert in (1, 0, -1):
                if lat == sag == vert == 0:
                    continue
                out.append(DirectionPull(lat, sag, vert))
    return tuple(out)


def laban8_middle() -> tuple[DirectionPull, ...]:
    """The eight horizontal pulls, used for ground translation."""
    return tuple(d for d in laban26() if d.vertical == 0)


def direction_vector(d: DirectionPull) -> np.ndarray:
    """Unit vector of a pull in the body frame.  place-middle has none."""
    if d.is_place_middle:
        raise ZeroDirection("place-middle has no direction vector")
    v = np.array([d.lateral, d.sagittal, d.vertical], dtype=float)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class VsamSpec:
    """What the access model exposes: origins, directions and size range.

    kmax maps (origin label, direction name) to the highest size stored so
    far; the databank fills it in as poses are appended.
    """

    origins: tuple[str, ...]
    directions: frozenset[DirectionPull]
    sizes: tuple[int, ...]
    kmax: dict = field(default_factory=dict)

    @property
    def s_max(self) -> int:
        return self.sizes[-1]


def build_vsam(
    origins: Iterable[str],
    directions: Iterable[DirectionPull],
    s_max: int,
    platform=None,
) -> VsamSpec:
    """Assemble a VsamSpec; validates origins against the platform if given."""
    origins = tuple(origins)
    if not origins:
        raise UnknownOrigin("origin set is empty")
    if platform is not None:
        known = set(platform.labels.distals) | set(platform.labels.core)
        for o in origins:
            if o not in known:
                raise UnknownOrigin(f"origin {o!r} is not a label of {platform.name}")
    dirs = frozenset(directions)
    for d in dirs:
        if d.is_place_middle:
            raise ZeroDirection("place-middle cannot be part of a stored vocabulary")
    if s_max < 1:
        raise InvalidSizeCount(f"s_max must be at least 1, got {s_max}")
    return VsamSpec(origins=origins, directions=dirs, sizes=tuple(range(1, s_max + 1)))
