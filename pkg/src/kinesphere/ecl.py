"""Two-table pose databank keyed by (origin, limb, direction, size).

The vsam table holds one row per stored (origin, limb, direction) triple;
the pose table holds its sized poses with gapless p_id 1..kmax.  Values are
canonicalized to 9 significant decimal digits on the way in, which makes the
JSON export byte-stable and the export/import cycle lossless.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .errors import (
    DuplicateEntry,
    FormatError,
    IntegrityError,
    InvalidSizeCount,
    JointConflict,
    LimitViolation,
    NoSuchEntry,
    SizeOverflow,
    SupportMismatch,
    UnknownKId,
    UnknownLabel,
    UnknownOrigin,
    UnknownDirectionName,
    ZeroDirection,
)
from .eurdf import PlatformDescription, subtree
from .vsam import DirectionPull, VsamSpec, parse_direction

FILE_VERSION = 1

PoseValues = tuple  # length-M tuple of float | None


def canonical_value(v: float) -> float:
    """Quantize to the databank's storage precision (9 significant digits)."""
    f = float(v)
    if math.isnan(f) or math.isinf(f):
        raise FormatError(f"pose values must be finite, got {f}")
    f = float(f"{f:.9g}")
    return 0.0 if f == 0.0 else f  # normalizes -0.0


@dataclass(frozen=True)
class PartialPose:
    """Length-M joint vector; None marks joints the pose does not bind."""

    values: PoseValues

    @cached_property
    def support_indices(self) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.values) if v is not None)

    def support_ids(self, joint_space) -> frozenset[str]:
        return frozenset(joint_space.dims[i].joint_id for i in self.support_indices)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class VsamRow:
    k_id: int
    origin: str
    limb: str
    direction: DirectionPull


@dataclass(frozen=True)
class PoseRow:
    p_id: int
    k_id: int
    values: PoseValues


def join_poses(poses: Iterable[PartialPose], joint_space=None) -> PartialPose:
    """Union of partial poses; agreeing overlaps merge, disagreements raise."""
    poses = list(poses)
    if not poses:
        raise ValueError("join_poses needs at least one pose")
    m = len(poses[0])
    for p in poses:
        if len(p) != m:
            raise SupportMismatch(f"pose lengths differ: {len(p)} != {m}")
    merged: list = [None] * m
    for p in poses:
        for i, v in enumerate(p.values):
            if v is None:
                continue
            if merged[i] is None:
                merged[i] = v
            elif merged[i] != v:
                name = joint_space.dims[i].joint_id if joint_space else f"index {i}"
                raise JointConflict(name)
    return PartialPose(values=tuple(merged))


class EclStore:
    """Mutable databank bound to one platform.

    Mutation happens under a lock; reads hand out immutable rows so callers
    can treat everything as snapshots.
    """

    def __init__(
        self,
        spec: VsamSpec,
        platform: Optional[PlatformDescription] = None,
        platform_name: Optional[str] = None,
    ):
        # Own copy of kmax: appends fill it in without mutating the caller's spec.
        self.spec = replace(spec, kmax=dict(spec.kmax))
        self.platform = platform
        self.platform_name = platform_name or (platform.name if platform else "")
        self._rows: dict[int, VsamRow] = {}
        self._triple: dict[tuple[str, str, str], int] = {}
        self._poses: dict[int, list[PoseRow]] = {}
        self._next_k = 1
        self._lock = threading.RLock()

    # --- views ---

    @property
    def vsam_rows(self) -> tuple[VsamRow, ...]:
        return tuple(self._rows[k] for k in sorted(self._rows))

    @property
    def pose_rows(self) -> tuple[PoseRow, ...]:
        out = []
        for k in sorted(self._poses):
            out.extend(self._poses[k])
        return tuple(out)

    def poses_of(self, k_id: int) -> tuple[PoseRow, ...]:
        if k_id not in self._rows:
            raise UnknownKId(f"no vsam row {k_id}")
        return tuple(self._poses[k_id])

    def __eq__(self, other) -> bool:
        if not isinstance(other, EclStore):
            return NotImplemented
        return (
            self.platform_name == other.platform_name
            and self.spec == other.spec
            and self.vsam_rows == other.vsam_rows
            and self.pose_rows == other.pose_rows
        )

    # --- mutation ---

    def insert_entry(self, origin: str, limb: str, direction: DirectionPull) -> int:
        if direction.is_place_middle:
            raise ZeroDirection("place-middle is never stored")
        if direction not in self.spec.directions:
            raise UnknownDirectionName(
                f"direction {direction.name!r} is outside the vocabulary"
            )
        if self.platform is not None:
            labels = self.platform.labels
            if origin not in labels.distals and origin not in labels.core:
                raise UnknownOrigin(f"origin {origin!r} is not a label of the platform")
            if limb not in labels.limbs and limb not in labels.core:
                raise UnknownLabel(f"limb {limb!r} is not a label of the platform")
            if (origin in labels.core) != (limb in labels.core):
                raise UnknownLabel(
                    "translation rows pair a core origin with a core limb; "
                    f"got ({origin!r}, {limb!r})"
                )
        key = (origin, limb, direction.name)
        with self._lock:
            if key in self._triple:
                raise DuplicateEntry(f"entry exists for {key}")
            k_id = self._next_k
            self._next_k += 1  # monotone, never reused
            self._rows[k_id] = VsamRow(k_id=k_id, origin=origin, limb=limb,
                                       direction=direction)
            self._triple[key] = k_id
            self._poses[k_id] = []
            return k_id

    def append_pose(self, k_id: int, values: Sequence) -> int:
        with self._lock:
            row = self._rows.get(k_id)
            if row is None:
                raise UnknownKId(f"no vsam row {k_id}")
            if self.platform is None:
                raise SupportMismatch(
                    "store has no platform bound; cannot check pose support"
                )
            jspace = self.platform.joint_space
            if len(values) != jspace.m:
                raise SupportMismatch(
                    f"pose length {len(values)} != joint space size {jspace.m}"
                )
            canon = tuple(None if v is None else canonical_value(v) for v in values)
            support = frozenset(i for i, v in enumerate(canon) if v is not None)
            expected = frozenset(
                jspace.index_of[j] for j in subtree(self.platform, row.limb).joints
            )
            if support != expected:
                got = sorted(jspace.dims[i].joint_id for i in support)
                want = sorted(jspace.dims[i].joint_id for i in expected)
                raise SupportMismatch(
                    f"pose support {got} != subtree of {row.limb!r} {want}"
                )
            for i in support:
                dim = jspace.dims[i]
                v = canon[i]
                if not dim.limit_min <= v <= dim.limit_max:
                    raise LimitViolation(
                        f"{dim.joint_id}: {v} outside [{dim.limit_min}, {dim.limit_max}]"
                    )
            p_id = len(self._poses[k_id]) + 1
            if p_id > self.spec.s_max:
                raise SizeOverflow(self.spec.s_max,
                                   f"row {k_id} already stores {self.spec.s_max} sizes")
            self._poses[k_id].append(PoseRow(p_id=p_id, k_id=k_id, values=canon))
            self.spec.kmax[(row.origin, row.direction.name)] = p_id
            return p_id

    # --- lookup ---

    def kmax_of(self, origin: str, limb: str, direction: DirectionPull) -> int:
        k_id = self._triple.get((origin, limb, direction.name))
        if k_id is None:
            raise NoSuchEntry(
                f"no entry for ({origin!r}, {limb!r}, {direction.name!r})"
            )
        return len(self._poses[k_id])

    def has_entry(self, origin: str, limb: str, direction: DirectionPull) -> bool:
        return (origin, limb, direction.name) in self._triple

    def query(self, limb: str, origin: str, direction: DirectionPull,
              s: int) -> PartialPose:
        """The stored pose for reaching `direction` at size s.  Exact lookup:
        no interpolation between sizes ever happens."""
        if s < 1:
            raise InvalidSizeCount(f"size must be >= 1, got {s}")
        k_id = self._triple.get((origin, limb, direction.name))
        if k_id is None:
            raise NoSuchEntry(
                f"no entry for ({origin!r}, {limb!r}, {direction.name!r})"
            )
        poses = self._poses[k_id]
        if s > len(poses):
            raise SizeOverflow(len(poses))
        return PartialPose(values=poses[s - 1].values)

    def entries_for(self, origin: str, limb: str) -> tuple[VsamRow, ...]:
        return tuple(
            self._rows[k]
            for key, k in sorted(self._triple.items())
            if key[0] == origin and key[1] == limb
        )


# --- canonical JSON ----------------------------------------------------------

def _emit(obj, out: list):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            raise FormatError(f"cannot serialize {obj}")
        out.append(f"{obj + 0.0:.9g}" if obj == 0.0 else f"{obj:.9g}")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            if not isinstance(key, str):
                raise FormatError(f"non-string key {key!r}")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise FormatError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> bytes:
    out: list[str] = []
    _emit(obj, out)
    return "".join(out).encode("ascii")


def export_store(store: EclStore) -> bytes:
    """Canonical byte form; equal stores export byte-identical files."""
    kmax_nested: dict[str, dict[str, int]] = {}
    for (origin, dname), n in store.spec.kmax.items():
        kmax_nested.setdefault(origin, {})[dname] = n
    doc = {
        "version": FILE_VERSION,
        "platform": store.platform_name,
        "spec": {
            "origins": list(store.spec.origins),
            "directions": sorted(d.name for d in store.spec.directions),
            "sizes": list(store.spec.sizes),
            "kmax": kmax_nested,
        },
        "vsam": [
            {"k_id": r.k_id, "origin": r.origin, "limb": r.limb,
             "direction": r.direction.name}
            for r in store.vsam_rows
        ],
        "pose": [
            {"p_id": p.p_id, "k_id": p.k_id, "values": list(p.values)}
            for p in store.pose_rows
        ],
    }
    return canonical_json(doc)


def import_store(data, platform: Optional[PlatformDescription] = None) -> EclStore:
    """Parse and integrity-check an exported databank."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict) or doc.get("version") != FILE_VERSION:
        raise FormatError(f"unsupported file version {doc.get('version')!r}"
                          if isinstance(doc, dict) else "top level must be an object")
    for key in ("platform", "spec", "vsam", "pose"):
        if key not in doc:
            raise FormatError(f"missing {key!r} section")
    spec_doc = doc["spec"]
    try:
        directions = frozenset(parse_direction(n) for n in spec_doc["directions"])
        sizes = tuple(int(s) for s in spec_doc["sizes"])
        origins = tuple(spec_doc["origins"])
        kmax = {
            (o, dname): int(n)
            for o, per_dir in spec_doc.get("kmax", {}).items()
            for dname, n in per_dir.items()
        }
    except (KeyError, TypeError, ValueError, UnknownDirectionName) as e:
        raise FormatError(f"bad spec section: {e}") from None
    if sizes != tuple(range(1, len(sizes) + 1)):
        raise FormatError(f"sizes must be 1..s_max, got {list(sizes)}")
    spec = VsamSpec(origins=origins, directions=directions, sizes=sizes, kmax=kmax)

    store = EclStore(spec, platform=platform,
                     platform_name=str(doc["platform"]))
    store.spec.kmax.update(kmax)

    seen_triples: set[tuple[str, str, str]] = set()
    rows: dict[int, VsamRow] = {}
    for entry in doc["vsam"]:
        try:
            k_id = int(entry["k_id"])
            direction = parse_direction(entry["direction"])
            row = VsamRow(k_id=k_id, origin=str(entry["origin"]),
                          limb=str(entry["limb"]), direction=direction)
        except (KeyError, TypeError, ValueError, UnknownDirectionName) as e:
            raise FormatError(f"bad vsam row {entry!r}: {e}") from None
        if k_id in rows:
            raise IntegrityError(f"duplicate k_id {k_id}")
        triple = (row.origin, row.limb, row.direction.name)
        if triple in seen_triples:
            raise IntegrityError(f"duplicate triple {triple}")
        seen_triples.add(triple)
        rows[k_id] = row

    poses: dict[int, dict[int, PoseRow]] = {k: {} for k in rows}
    for entry in doc["pose"]:
        try:
            p_id = int(entry["p_id"])
            k_id = int(entry["k_id"])
            raw = entry["values"]
            values = tuple(None if v is None else canonical_value(float(v))
                           for v in raw)
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"bad pose row {entry!r}: {e}") from None
        if k_id not in rows:
            raise IntegrityError(f"pose row references unknown k_id {k_id}")
        if p_id in poses[k_id]:
            raise IntegrityError(f"duplicate pose key ({p_id}, {k_id})")
        if p_id > len(sizes):
            raise IntegrityError(f"p_id {p_id} beyond s_max {len(sizes)}")
        poses[k_id][p_id] = PoseRow(p_id=p_id, k_id=k_id, values=values)

    m = platform.joint_space.m if platform is not None else None
    for k_id, by_p in poses.items():
        expected = list(range(1, len(by_p) + 1))
        if sorted(by_p) != expected:
            raise IntegrityError(
                f"pose ids for k_id {k_id} are not gapless: {sorted(by_p)}"
            )
        if m is not None:
            for p in by_p.values():
                if len(p.values) != m:
                    raise IntegrityError(
                        f"pose ({p.p_id}, {k_id}) has {len(p.values)} values, "
                        f"platform has {m} joints"
                    )

    store._rows = rows
    store._triple = {(r.origin, r.limb, r.direction.name): k for k, r in rows.items()}
    store._poses = {k: [by_p[p] for p in sorted(by_p)] for k, by_p in poses.items()}
    store._next_k = max(rows) + 1 if rows else 1
    return store
