"""Forward kinematics on the joint grid and reach-pose installation.

All heavy numerics route through the kernels in `_kernels`, which run
jit-compiled by default and as pure Python when KINESPHERE_NO_NUMBA is set.
Both paths execute the same scalar arithmetic, so results are bit-identical.
"""
from __future__ import annotations

import json
import math
import os
import re
import warnings
import zlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from ._kernels import FIXED, PRISMATIC, REVOLUTE
from .ecl import EclStore, PartialPose
from .errors import (
    FormatError,
    InstallFailure,
    LabelingError,
    SchemaViolation,
    SupportMismatch,
    UnknownLabel,
    UnknownOrigin,
    ZeroDirection,
)
from .eurdf import PlatformDescription, subtree
from .vsam import DirectionPull, VsamSpec, direction_vector, laban8_middle, parse_direction

_TYPE_CODE = {"fixed": FIXED, "revolute": REVOLUTE, "prismatic": PRISMATIC}
_GRID_EPS = 1e-9
_LIMB_DIGITS = re.compile(r"^limb_([1-9])([1-9])$")
_DISTAL_DIGITS = re.compile(r"^distal_([1-9])([1-9])?$")


@dataclass(frozen=True, eq=False)
class FrameTransform:
    """Pose of a link frame in the root frame."""

    rotation: np.ndarray  # (3, 3)
    translation: np.ndarray  # (3,)


@dataclass(frozen=True)
class FidelityReport:
    """How well a pose displaces a limb tip along a commanded direction."""

    displacement: tuple[float, float, float]
    magnitude: float
    cosine: float

    @property
    def projection(self) -> float:
        return self.magnitude * self.cosine


@dataclass(frozen=True)
class InstallConfig:
    restarts: int = 16
    iterations: int = 200
    orthogonal_penalty: float = 0.5
    seed: int = 0
    size_fractions: Optional[tuple[float, ...]] = None
    reach_floor_fraction: float = 0.05
    fidelity_floor: float = 0.7


def _rpy_matrix(rpy: Sequence[float]) -> np.ndarray:
    r, p, y = rpy
    cr, sr = math.cos(r), math.sin(r)
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    return rz @ ry @ rx


def _joint_row(joint, j_r, j_t, j_axis, j_type, row: int):
    j_r[row] = _rpy_matrix(joint.origin_rpy)
    j_t[row] = joint.origin_xyz
    axis = np.asarray(joint.axis, dtype=float)
    norm = float(np.linalg.norm(axis))
    if joint.actuated:
        if norm <= 0.0:
            raise SchemaViolation(f"joint {joint.joint_id!r} has a zero axis")
        axis = axis / norm
    j_axis[row] = axis
    j_type[row] = _TYPE_CODE[joint.type]


class _TreeArrays:
    """Whole-tree FK layout: one row per link, BFS order from the root."""

    def __init__(self, platform: PlatformDescription):
        tree = platform.tree
        jspace = platform.joint_space
        self.link_order = tree.descend_links(tree.root_link)
        self.row_of = {l: i for i, l in enumerate(self.link_order)}
        n = len(self.link_order)
        self.order_joint = np.full(n, -1, dtype=np.int64)
        self.order_parent = np.full(n, -1, dtype=np.int64)
        self.j_r = np.zeros((n, 3, 3))
        self.j_t = np.zeros((n, 3))
        self.j_axis = np.zeros((n, 3))
        self.j_type = np.zeros(n, dtype=np.int64)
        self.j_qidx = np.full(n, -1, dtype=np.int64)
        for i, link_id in enumerate(self.link_order):
            pj = tree.link_by_id[link_id].parent_joint
            if pj is None:
                continue
            joint = tree.joint_by_id[pj]
            self.order_joint[i] = i
            self.order_parent[i] = self.row_of[joint.parent_link]
            _joint_row(joint, self.j_r, self.j_t, self.j_axis, self.j_type, i)
            if joint.actuated:
                self.j_qidx[i] = jspace.index_of[joint.joint_id]


_tree_arrays_cache: dict[int, tuple[PlatformDescription, _TreeArrays]] = {}


def _tree_arrays(platform: PlatformDescription) -> _TreeArrays:
    hit = _tree_arrays_cache.get(id(platform))
    if hit is not None and hit[0] is platform:
        return hit[1]
    arrays = _TreeArrays(platform)
    _tree_arrays_cache[id(platform)] = (platform, arrays)
    return arrays


def _full_pose(platform: PlatformDescription, pose) -> np.ndarray:
    if isinstance(pose, PartialPose):
        pose = pose.values
    neutral = platform.neutral_pose()
    if len(pose) != len(neutral):
        raise SchemaViolation(
            f"pose length {len(pose)} != joint space size {len(neutral)}"
        )
    return np.array(
        [neutral[i] if v is None else float(v) for i, v in enumerate(pose)]
    )


def forward_kinematics(platform: PlatformDescription,
                       pose) -> dict[str, FrameTransform]:
    """Frame of every link in the root frame; unbound joints sit at neutral."""
    arrays = _tree_arrays(platform)
    q = _full_pose(platform, pose)
    n = len(arrays.link_order)
    out_r = np.empty((n, 3, 3))
    out_t = np.empty((n, 3))
    _kernels.fk_tree(arrays.order_joint, arrays.order_parent, arrays.j_r,
                     arrays.j_t, arrays.j_axis, arrays.j_type, arrays.j_qidx,
                     q, out_r, out_t)
    return {
        link_id: FrameTransform(rotation=out_r[i].copy(),
                                translation=out_t[i].copy())
        for i, link_id in enumerate(arrays.link_order)
    }


def _tip_link(platform: PlatformDescription, label: str) -> str:
    labels = platform.labels
    if label in labels.core:
        return platform.com_link
    sub = subtree(platform, label)
    tree = platform.tree
    tips = [
        l for l in sub.links
        if not any(j.child_link in sub.links for j in tree.child_joints.get(l, ()))
    ]
    if len(tips) != 1:
        raise LabelingError(
            f"{label!r} does not name a serial chain (tips: {sorted(tips)})"
        )
    return tips[0]


def limb_endpoint(platform: PlatformDescription, label: str, pose) -> np.ndarray:
    """Tip-frame position of a labeled chain (core labels: the base frame)."""
    frames = forward_kinematics(platform, pose)
    return frames[_tip_link(platform, label)].translation


def limb_reach(platform: PlatformDescription, label: str) -> float:
    """Total link length of a labeled subtree."""
    sub = subtree(platform, label)
    tree = platform.tree
    return float(sum(tree.effective_extent(l) for l in sub.links))


def verify_direction(platform: PlatformDescription, neutral, pose,
                     origin: str, limb: str,
                     direction: DirectionPull) -> FidelityReport:
    """Measure the tip displacement a pose produces against a direction.

    Displacement is the tip motion from the neutral pose, in body-frame
    components; the origin label anchors the report but cannot change the
    vector, so equal poses verify identically at every origin.
    """
    if direction.is_place_middle:
        raise ZeroDirection("place-middle has no direction to verify against")
    if isinstance(pose, PartialPose):
        support = pose.support_indices
        values = pose.values
    else:
        values = tuple(pose)
        support = frozenset(i for i, v in enumerate(values) if v is not None)
    jspace = platform.joint_space
    expected = frozenset(
        jspace.index_of[j] for j in subtree(platform, limb).joints
    )
    if support != expected:
        got = sorted(jspace.dims[i].joint_id for i in support)
        want = sorted(jspace.dims[i].joint_id for i in expected)
        raise SupportMismatch(f"pose support {got} != subtree of {limb!r} {want}")
    neutral = tuple(neutral)
    if len(neutral) != jspace.m:
        raise SupportMismatch(
            f"neutral length {len(neutral)} != joint space size {jspace.m}"
        )
    full = tuple(
        neutral[i] if v is None else float(v) for i, v in enumerate(values)
    )
    dvec = direction_vector(direction)
    ep0 = limb_endpoint(platform, limb, neutral)
    ep1 = limb_endpoint(platform, limb, full)
    disp = ep1 - ep0
    mag = float(np.linalg.norm(disp))
    cosine = float(disp @ dvec) / mag if mag > 0.0 else 0.0
    return FidelityReport(
        displacement=(float(disp[0]), float(disp[1]), float(disp[2])),
        magnitude=mag,
        cosine=cosine,
    )


class _ChainProblem:
    """Array form of one limb's serial chain, split into a constant prefix
    (everything above the subtree, held at neutral) and the movable tail."""

    def __init__(self, platform: PlatformDescription, limb: str):
        labels = platform.labels
        if limb not in labels.limbs:
            raise UnknownLabel(f"{limb!r} is not a limb label")
        tree = platform.tree
        sub = subtree(platform, limb)
        tip = _tip_link(platform, limb)
        path_joints = []
        cur = tip
        while True:
            pj = tree.link_by_id[cur].parent_joint
            if pj is None:
                break
            joint = tree.joint_by_id[pj]
            path_joints.append(joint)
            cur = joint.parent_link
        path_joints.reverse()
        first = next(
            (i for i, j in enumerate(path_joints) if j.joint_id in sub.joints),
            None,
        )
        if first is None:
            raise LabelingError(f"{limb!r} has no actuated joints")
        prefix = path_joints[:first]
        chain = path_joints[first:]
        if {j.joint_id for j in chain if j.actuated} != set(sub.joints):
            raise LabelingError(f"{limb!r} does not name a serial chain")

        jspace = platform.joint_space
        n = len(chain)
        self.limb = limb
        self.j_r = np.zeros((n, 3, 3))
        self.j_t = np.zeros((n, 3))
        self.j_axis = np.zeros((n, 3))
        self.j_type = np.zeros(n, dtype=np.int64)
        self.qmin = np.zeros(n)
        self.qinc = np.zeros(n)
        self.qn = np.ones(n, dtype=np.int64)
        self.neutral_idx = np.zeros(n, dtype=np.int64)
        self.qidx = np.full(n, -1, dtype=np.int64)
        neutral_q = np.zeros(n)
        for row, joint in enumerate(chain):
            _joint_row(joint, self.j_r, self.j_t, self.j_axis, self.j_type, row)
            if not joint.actuated:
                continue
            dim = jspace.dims[jspace.index_of[joint.joint_id]]
            self.qidx[row] = jspace.index_of[joint.joint_id]
            self.qmin[row] = dim.limit_min
            self.qinc[row] = dim.increment
            span = dim.limit_max - dim.limit_min
            self.qn[row] = int(math.floor(span / dim.increment + _GRID_EPS)) + 1
            neutral_q[row] = dim.neutral
            snap = int(round((dim.neutral - dim.limit_min) / dim.increment))
            self.neutral_idx[row] = min(max(snap, 0), self.qn[row] - 1)

        self.pre_r = np.eye(3)
        self.pre_t = np.zeros(3)
        if prefix:
            m = len(prefix)
            p_r = np.zeros((m, 3, 3))
            p_t = np.zeros((m, 3))
            p_axis = np.zeros((m, 3))
            p_type = np.zeros(m, dtype=np.int64)
            p_q = np.zeros(m)
            for row, joint in enumerate(prefix):
                _joint_row(joint, p_r, p_t, p_axis, p_type, row)
                if joint.actuated:
                    dim = jspace.dims[jspace.index_of[joint.joint_id]]
                    p_q[row] = dim.neutral
            _kernels.chain_transform(np.eye(3), np.zeros(3), p_r, p_t, p_axis,
                                     p_type, p_q, self.pre_r, self.pre_t)

        self.neutral_ep = np.empty(3)
        _kernels.chain_endpoint(self.pre_r, self.pre_t, self.j_r, self.j_t,
                                self.j_axis, self.j_type, neutral_q,
                                self.neutral_ep)
        self.reach = limb_reach(platform, limb)

    def grid_value(self, coord: int, k: int) -> float:
        return float(self.qmin[coord] + k * self.qinc[coord])

    def pose_values(self, idx: np.ndarray, m: int) -> tuple:
        values: list = [None] * m
        for coord in range(len(self.qidx)):
            qi = self.qidx[coord]
            if qi >= 0:
                values[qi] = self.grid_value(coord, int(idx[coord]))
        return tuple(values)


def _start_matrix(problem: _ChainProblem, config: InstallConfig,
                  direction: DirectionPull) -> np.ndarray:
    rows = max(1, config.restarts)
    starts = np.zeros((rows, len(problem.qn)), dtype=np.int64)
    starts[0] = problem.neutral_idx
    key = zlib.crc32(f"{problem.limb}|{direction.name}".encode())
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([config.seed, key]))
    )
    for r in range(1, rows):
        for c in range(len(problem.qn)):
            starts[r, c] = rng.integers(0, int(problem.qn[c]))
    return starts


def _joint_distance(idx: np.ndarray, neutral_idx: np.ndarray) -> int:
    return int(np.abs(idx - neutral_idx).sum())


def _solve_direction(problem: _ChainProblem, direction: DirectionPull,
                     config: InstallConfig, s_max: int,
                     m: int) -> tuple[Optional[list[tuple]], float]:
    """Poses for sizes 1..k for one (limb, direction), plus the optimizer's
    best projection.  Poses are None when the pair is skipped."""
    dvec = direction_vector(direction)
    starts = _start_matrix(problem, config, direction)
    lam = config.orthogonal_penalty
    best_idx, _, best_proj = _kernels.ascend(
        problem.pre_r, problem.pre_t, problem.j_r, problem.j_t, problem.j_axis,
        problem.j_type, problem.qmin, problem.qinc, problem.qn, starts, lam,
        dvec, problem.neutral_ep, config.iterations)
    floor = config.reach_floor_fraction * problem.reach
    if best_proj <= floor:
        return None, float(best_proj)
    trail, proj, mag, cosine = _kernels.ladder_walk(
        problem.pre_r, problem.pre_t, problem.j_r, problem.j_t, problem.j_axis,
        problem.j_type, problem.qmin, problem.qinc, problem.neutral_idx,
        best_idx, lam, dvec, problem.neutral_ep)

    # Candidates walk outward: both displacement and projection must grow,
    # and the direction must already read clearly at every kept point.
    threshold = config.fidelity_floor + 1e-9
    kept: list[int] = []
    last_mag = 0.0
    last_proj = 0.0
    for row in range(trail.shape[0]):
        if cosine[row] < threshold:
            continue
        if mag[row] <= last_mag or proj[row] <= last_proj:
            continue
        kept.append(row)
        last_mag = mag[row]
        last_proj = proj[row]
    if not kept:
        return None, float(best_proj)

    fractions = config.size_fractions or tuple(
        k / s_max for k in range(1, s_max + 1)
    )
    chosen: list[int] = []
    for frac in fractions:
        target = frac * best_proj
        best_row = None
        best_key = None
        for row in kept:
            key = (
                abs(proj[row] - target),
                _joint_distance(trail[row], problem.neutral_idx),
                row,
            )
            if best_key is None or key < best_key:
                best_key = key
                best_row = row
        chosen.append(best_row)
    # Selections come from a projection-sorted list, so dropping repeats
    # leaves both projection and magnitude strictly increasing.
    out = []
    seen: set[int] = set()
    for row in chosen:
        if row in seen:
            continue
        seen.add(row)
        out.append(problem.pose_values(trail[row], m))
    return (out, float(best_proj)) if out else (None, float(best_proj))


def _nested_limbs(labels, origin: str) -> tuple[str, ...]:
    m = _DISTAL_DIGITS.match(origin)
    if m is None or m.group(2) is None:
        return ()
    chain, depth = m.group(1), int(m.group(2))
    out = []
    for label in labels.limbs:
        lm = _LIMB_DIGITS.match(label)
        if lm and lm.group(1) == chain and int(lm.group(2)) >= depth:
            out.append(label)
    return tuple(sorted(out))


def articulation_pairs(platform: PlatformDescription,
                       origins: Sequence[str]) -> tuple[tuple[str, str], ...]:
    """(origin, limb) cells an installer will attempt: each joint-label
    origin paired with every limb at or below its depth on the same chain.
    Core origins are translation-only and never appear here."""
    labels = platform.labels
    out = []
    for origin in origins:
        if origin in labels.distals:
            for limb in _nested_limbs(labels, origin):
                out.append((origin, limb))
    return tuple(out)


def auto_install(platform: PlatformDescription, spec: VsamSpec,
                 config: InstallConfig = InstallConfig()) -> EclStore:
    """Populate a databank by optimizing a reach pose per (limb, direction)
    and laddering it into sizes.

    Articulation entries are keyed by each distal origin and every limb at
    or below its depth on the same chain.  Mobile platforms also get
    zero-pose rows pairing core origins with their own label, so any sized
    command there overflows entirely to base translation.
    """
    labels = platform.labels
    store = EclStore(spec, platform=platform)
    jspace = platform.joint_space
    directions = sorted(spec.directions)
    horizontal = sorted(laban8_middle())

    art_origins: list[str] = []
    core_origins: list[str] = []
    for origin in spec.origins:
        if origin in labels.distals:
            art_origins.append(origin)
        elif origin in labels.core:
            core_origins.append(origin)
        else:
            raise UnknownOrigin(f"{origin!r} is not a label of the platform")

    limb_set: list[str] = []
    for origin in art_origins:
        for limb in _nested_limbs(labels, origin):
            if limb not in limb_set:
                limb_set.append(limb)

    solved: dict[tuple[str, str], Optional[list[tuple]]] = {}
    for limb in sorted(limb_set):
        problem = _ChainProblem(platform, limb)
        any_positive = False
        for direction in directions:
            poses, best_proj = _solve_direction(problem, direction, config,
                                                spec.s_max, jspace.m)
            solved[(limb, direction.name)] = poses
            if best_proj > 0.0:
                any_positive = True
        if not any_positive:
            raise InstallFailure(
                f"limb {limb!r} achieved no positive displacement in any "
                "direction; its subtree endpoint cannot move"
            )

    for origin in spec.origins:
        if origin in labels.core:
            if not platform.mobile:
                continue
            for direction in horizontal:
                if direction in spec.directions:
                    store.insert_entry(origin, origin, direction)
            continue
        for limb in _nested_limbs(labels, origin):
            for direction in directions:
                poses = solved[(limb, direction.name)]
                if not poses:
                    continue
                k_id = store.insert_entry(origin, limb, direction)
                for values in poses:
                    store.append_pose(k_id, values)
    return store


def record_install(platform: PlatformDescription, spec: VsamSpec,
                   recorded_poses) -> EclStore:
    """Build a store from externally recorded poses.

    Accepts a path, JSON text/bytes, or the parsed list.  Each entry holds
    origin, limb, direction, and poses in increasing size order.  Values for
    joints outside the limb's subtree are nulled with a warning; everything
    else is validated strictly.
    """
    entries = _load_recorded(recorded_poses)
    store = EclStore(spec, platform=platform)
    jspace = platform.joint_space
    for entry in entries:
        try:
            origin = entry["origin"]
            limb = entry["limb"]
            direction = entry["direction"]
            poses = entry.get("poses", [])
        except (TypeError, KeyError) as e:
            raise FormatError(f"bad recorded entry {entry!r}: {e}") from None
        if isinstance(direction, str):
            direction = parse_direction(direction)
        support = frozenset(
            jspace.index_of[j] for j in subtree(platform, limb).joints
        )
        k_id = store.insert_entry(origin, limb, direction)
        for n, raw in enumerate(poses, start=1):
            if len(raw) != jspace.m:
                raise FormatError(
                    f"pose {n} for ({origin!r}, {limb!r}) has {len(raw)} "
                    f"values, platform has {jspace.m} joints"
                )
            masked = list(raw)
            dropped = [
                jspace.dims[i].joint_id
                for i, v in enumerate(masked)
                if v is not None and i not in support
            ]
            if dropped:
                warnings.warn(
                    f"pose {n} for ({origin!r}, {limb!r}, {direction.name!r}): "
                    f"ignored values for joints outside the limb: {dropped}"
                )
                for i in range(len(masked)):
                    if i not in support:
                        masked[i] = None
            store.append_pose(k_id, masked)
    return store


def _load_recorded(source) -> list:
    if isinstance(source, (list, tuple)):
        return list(source)
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, "rb") as fh:
            source = fh.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except (json.JSONDecodeError, TypeError) as e:
        raise FormatError(f"recorded poses are not valid JSON: {e}") from None
    if not isinstance(doc, list):
        raise FormatError("recorded poses must be a JSON array of entries")
    return doc
