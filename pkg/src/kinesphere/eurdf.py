"""Labeled platform descriptions.

An eURDF document is standard URDF plus one <body_part> child per element:
link labels are whitespace-separated tokens (core tokens start with "c_",
limb tokens are limb_<chain><depth>), joint labels are distal_<chain><depth>
or single-index distal_<k> for joints internal to the core.  A few auxiliary
elements carry data URDF has no slot for: <extent> (physical link length),
<increment> (actuator resolution), <neutral> (home position), <locomotion>
and <translation_quantum> at the root.
"""
from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

from .errors import (
    DisconnectedCore,
    LabelingError,
    MalformedXml,
    SchemaViolation,
    UnknownLabel,
)

# A link shorter than this cannot separate two joint locations.
EXTENT_EPS = 1e-6
DEFAULT_INCREMENT = 0.001

JOINT_TYPES = ("revolute", "prismatic", "fixed")
LOCOMOTION_MODES = ("none", "wheeled", "legged")

_CORE_RE = re.compile(r"^c_[1-9]$")
_LIMB_RE = re.compile(r"^limb_([1-9])([1-9])$")
_DISTAL_RE = re.compile(r"^distal_([1-9])([1-9])?$")


@dataclass(frozen=True)
class Link:
    link_id: str
    name: str
    geometry_extent: Optional[float] = None
    parent_joint: Optional[str] = None


@dataclass(frozen=True)
class Joint:
    joint_id: str
    name: str
    type: str
    parent_link: str
    child_link: str
    origin_xyz: tuple[float, float, float] = (0.0, 0.0, 0.0)
    origin_rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axis: tuple[float, float, float] = (1.0, 0.0, 0.0)
    limit_min: float = 0.0
    limit_max: float = 0.0
    increment: float = DEFAULT_INCREMENT
    neutral: float = 0.0

    @property
    def actuated(self) -> bool:
        return self.type != "fixed"


@dataclass(frozen=True)
class KinematicTree:
    links: tuple[Link, ...]
    joints: tuple[Joint, ...]

    @cached_property
    def link_by_id(self) -> dict[str, Link]:
        return {l.link_id: l for l in self.links}

    @cached_property
    def joint_by_id(self) -> dict[str, Joint]:
        return {j.joint_id: j for j in self.joints}

    @cached_property
    def child_joints(self) -> dict[str, tuple[Joint, ...]]:
        out: dict[str, list[Joint]] = {l.link_id: [] for l in self.links}
        for j in self.joints:
            out[j.parent_link].append(j)
        return {k: tuple(sorted(v, key=lambda j: j.joint_id)) for k, v in out.items()}

    @cached_property
    def root_link(self) -> str:
        roots = [l.link_id for l in self.links if l.parent_joint is None]
        if len(roots) != 1:
            raise SchemaViolation(f"tree must have exactly one root link, found {roots}")
        return roots[0]

    def descend_links(self, root: str) -> tuple[str, ...]:
        """root plus everything below it, in BFS order."""
        if root not in self.link_by_id:
            raise UnknownLabel(f"unknown link {root!r}")
        seen = [root]
        q = deque([root])
        while q:
            cur = q.popleft()
            for j in self.child_joints.get(cur, ()):
                seen.append(j.child_link)
                q.append(j.child_link)
        return tuple(seen)

    def effective_extent(self, link_id: str) -> float:
        """Physical length separating a link's joint from the next one.

        Explicit <extent> wins; otherwise the norm of the child joint's
        origin offset is used (zero when the link is a leaf).
        """
        link = self.link_by_id[link_id]
        if link.geometry_extent is not None:
            return link.geometry_extent
        children = self.child_joints.get(link_id, ())
        if not children:
            return 0.0
        return max(math.sqrt(sum(c * c for c in j.origin_xyz)) for j in children)


@dataclass(frozen=True)
class JointDim:
    joint_id: str
    limit_min: float
    limit_max: float
    increment: float
    neutral: float = 0.0


@dataclass(frozen=True)
class JointSpace:
    """Fixed ordering of the actuated joints; every pose vector follows it."""

    dims: tuple[JointDim, ...]

    @property
    def m(self) -> int:
        return len(self.dims)

    @cached_property
    def index_of(self) -> dict[str, int]:
        return {d.joint_id: i for i, d in enumerate(self.dims)}

    def neutral_pose(self) -> tuple[float, ...]:
        return tuple(d.neutral for d in self.dims)


@dataclass(frozen=True)
class LabelSets:
    """core: label -> link ids; limbs: label -> subtree root link;
    distals: label -> joint id."""

    core: dict[str, tuple[str, ...]]
    limbs: dict[str, str]
    distals: dict[str, str]

    @property
    def core_links(self) -> frozenset[str]:
        out: set[str] = set()
        for links in self.core.values():
            out.update(links)
        return frozenset(out)


@dataclass(frozen=True)
class Subtree:
    links: frozenset[str]
    joints: frozenset[str]


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    subject: str
    message: str


@dataclass(frozen=True)
class PlatformDescription:
    name: str
    tree: KinematicTree
    joint_space: JointSpace
    labels: LabelSets
    com_link: Optional[str] = None
    locomotion: str = "none"
    translation_quantum: Optional[float] = None

    @property
    def mobile(self) -> bool:
        return self.locomotion != "none"

    def neutral_pose(self) -> tuple[float, ...]:
        return self.joint_space.neutral_pose()


def _build_joint_space(tree: KinematicTree) -> JointSpace:
    dims = []
    for j in sorted(tree.joints, key=lambda j: j.joint_id):
        if not j.actuated:
            continue
        dims.append(
            JointDim(
                joint_id=j.joint_id,
                limit_min=j.limit_min,
                limit_max=j.limit_max,
                increment=j.increment,
                neutral=j.neutral,
            )
        )
    return JointSpace(dims=tuple(dims))


# --- parsing -----------------------------------------------------------------

def _floats(text: str, n: int, where: str) -> tuple[float, ...]:
    parts = text.split()
    if len(parts) != n:
        raise SchemaViolation(f"{where}: expected {n} numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise SchemaViolation(f"{where}: bad number in {text!r}") from None


def _float_attr(el: ET.Element, attr: str, where: str, default=None) -> Optional[float]:
    raw = el.get(attr)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise SchemaViolation(f"{where}: bad number {raw!r} for {attr}") from None


def _parse_document(text):
    """Shared parse of the XML surface; label tokens are returned raw."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise MalformedXml(str(e)) from None
    if root.tag != "robot":
        raise SchemaViolation(f"root element must be <robot>, got <{root.tag}>")
    name = root.get("name")
    if not name:
        raise SchemaViolation("<robot> requires a name attribute")

    locomotion = "none"
    quantum = None
    loco_el = root.find("locomotion")
    if loco_el is not None:
        locomotion = loco_el.get("mode", "none")
        if locomotion not in LOCOMOTION_MODES:
            raise SchemaViolation(f"unknown locomotion mode {locomotion!r}")
    tq_el = root.find("translation_quantum")
    if tq_el is not None:
        quantum = _float_attr(tq_el, "value", "translation_quantum")
        if quantum is None or quantum <= 0:
            raise SchemaViolation("translation_quantum requires a positive value")

    links: list[Link] = []
    link_labels: dict[str, tuple[str, ...]] = {}
    com_link = None
    for el in root.findall("link"):
        lname = el.get("name")
        if not lname:
            raise SchemaViolation("<link> requires a name attribute")
        if lname in link_labels:
            raise SchemaViolation(f"duplicate link name {lname!r}")
        extent = None
        ext_el = el.find("extent")
        if ext_el is not None:
            extent = _float_attr(ext_el, "value", f"link {lname}")
            if extent is None or extent < 0:
                raise SchemaViolation(f"link {lname}: extent requires a non-negative value")
        if el.get("contains_com") == "true":
            if com_link is not None:
                raise SchemaViolation(
                    f"contains_com set on both {com_link!r} and {lname!r}"
                )
            com_link = lname
        bp = el.find("body_part")
        tokens = tuple((bp.text or "").split()) if bp is not None else None
        links.append(Link(link_id=lname, name=lname, geometry_extent=extent))
        link_labels[lname] = tokens

    joints: list[Joint] = []
    joint_labels: dict[str, tuple[str, ...]] = {}
    parent_of: dict[str, str] = {}
    for el in root.findall("joint"):
        jname = el.get("name")
        if not jname:
            raise SchemaViolation("<joint> requires a name attribute")
        if jname in joint_labels:
            raise SchemaViolation(f"duplicate joint name {jname!r}")
        jtype = el.get("type")
        if jtype not in JOINT_TYPES:
            raise SchemaViolation(f"joint {jname}: unknown type {jtype!r}")
        parent_el = el.find("parent")
        child_el = el.find("child")
        if parent_el is None or child_el is None:
            raise SchemaViolation(f"joint {jname}: parent and child are required")
        parent = parent_el.get("link")
        child = child_el.get("link")
        if parent not in link_labels:
            raise SchemaViolation(f"joint {jname}: unknown parent link {parent!r}")
        if child not in link_labels:
            raise SchemaViolation(f"joint {jname}: unknown child link {child!r}")
        if child in parent_of:
            raise SchemaViolation(f"link {child!r} has two parent joints")
        parent_of[child] = jname

        xyz = (0.0, 0.0, 0.0)
        rpy = (0.0, 0.0, 0.0)
        origin_el = el.find("origin")
        if origin_el is not None:
            if origin_el.get("xyz"):
                xyz = _floats(origin_el.get("xyz"), 3, f"joint {jname} origin xyz")
            if origin_el.get("rpy"):
                rpy = _floats(origin_el.get("rpy"), 3, f"joint {jname} origin rpy")
        axis = (1.0, 0.0, 0.0)
        axis_el = el.find("axis")
        if axis_el is not None and axis_el.get("xyz"):
            axis = _floats(axis_el.get("xyz"), 3, f"joint {jname} axis")

        lo = hi = 0.0
        inc = DEFAULT_INCREMENT
        neutral = 0.0
        if jtype != "fixed":
            limit_el = el.find("limit")
            if limit_el is None:
                raise SchemaViolation(f"joint {jname}: {jtype} joints require <limit>")
            lo = _float_attr(limit_el, "lower", f"joint {jname} limit")
            hi = _float_attr(limit_el, "upper", f"joint {jname} limit")
            if lo is None or hi is None:
                raise SchemaViolation(f"joint {jname}: limit requires lower and upper")
            inc_el = el.find("increment")
            if inc_el is not None:
                inc = _float_attr(inc_el, "value", f"joint {jname} increment")
            neutral_el = el.find("neutral")
            if neutral_el is not None:
                neutral = _float_attr(neutral_el, "value", f"joint {jname} neutral")
            else:
                # Home defaults to zero; fall back to mid-range when zero is
                # outside the limits.
                neutral = 0.0 if lo <= 0.0 <= hi else (lo + hi) / 2.0

        bp = el.find("body_part")
        joint_labels[jname] = tuple((bp.text or "").split()) if bp is not None else ()
        joints.append(
            Joint(
                joint_id=jname,
                name=jname,
                type=jtype,
                parent_link=parent,
                child_link=child,
                origin_xyz=xyz,
                origin_rpy=rpy,
                axis=axis,
                limit_min=lo,
                limit_max=hi,
                increment=inc,
                neutral=neutral,
            )
        )

    links = [
        Link(
            link_id=l.link_id,
            name=l.name,
            geometry_extent=l.geometry_extent,
            parent_joint=parent_of.get(l.link_id),
        )
        for l in links
    ]
    tree = KinematicTree(links=tuple(links), joints=tuple(joints))
    tree.root_link  # raises SchemaViolation on zero or multiple roots
    _check_acyclic(tree)
    return name, tree, link_labels, joint_labels, com_link, locomotion, quantum


def _check_acyclic(tree: KinematicTree):
    seen = set(tree.descend_links(tree.root_link))
    if len(seen) != len(tree.links):
        missing = sorted(l.link_id for l in tree.links if l.link_id not in seen)
        raise SchemaViolation(f"links unreachable from root (cycle?): {missing}")


def parse_urdf_tree(text) -> tuple[str, KinematicTree]:
    """Parse just the kinematic structure; labels may be absent."""
    name, tree, _, _, _, _, _ = _parse_document(text)
    return name, tree


def parse_eurdf(text) -> PlatformDescription:
    """Parse a labeled document and enforce the labeling invariants."""
    platform, issues = parse_eurdf_report(text)
    if issues:
        first = issues[0]
        msg = f"{first.code} ({first.subject}): {first.message}"
        if first.code == "DISCONNECTED_CORE":
            raise DisconnectedCore(msg)
        raise LabelingError(msg)
    return platform


def parse_eurdf_report(text) -> tuple[PlatformDescription, list[ValidationIssue]]:
    """Like parse_eurdf, but collects label violations instead of raising.

    Schema-level problems (bad XML, bad references) still raise: without a
    sound tree there is nothing to report against.
    """
    name, tree, link_labels, joint_labels, com_link, locomotion, quantum = (
        _parse_document(text)
    )

    core: dict[str, set[str]] = {}
    limb_members: dict[str, set[str]] = {}
    for link_id, tokens in link_labels.items():
        if tokens is None:
            raise SchemaViolation(f"link {link_id}: missing <body_part>")
        if not tokens:
            raise SchemaViolation(f"link {link_id}: empty <body_part>")
        for tok in tokens:
            if _CORE_RE.match(tok):
                core.setdefault(tok, set()).add(link_id)
            elif _LIMB_RE.match(tok):
                limb_members.setdefault(tok, set()).add(link_id)
            elif _DISTAL_RE.match(tok):
                raise SchemaViolation(f"link {link_id}: joint label {tok!r} on a link")
            else:
                raise SchemaViolation(f"link {link_id}: unknown label {tok!r}")

    distals: dict[str, str] = {}
    for joint_id, tokens in joint_labels.items():
        for tok in tokens:
            if _DISTAL_RE.match(tok):
                if tok in distals:
                    raise SchemaViolation(
                        f"label {tok!r} assigned to joints {distals[tok]!r} and {joint_id!r}"
                    )
                distals[tok] = joint_id
            else:
                raise SchemaViolation(f"joint {joint_id}: unknown label {tok!r}")

    if not core:
        raise SchemaViolation("no core label (c_*) anywhere in the document")

    # Limb subtree roots: the one member whose parent link is not a member.
    limbs: dict[str, str] = {}
    issues: list[ValidationIssue] = []
    for tok in sorted(limb_members):
        members = limb_members[tok]
        roots = []
        for link_id in members:
            pj = tree.link_by_id[link_id].parent_joint
            parent = tree.joint_by_id[pj].parent_link if pj else None
            if parent is None or parent not in members:
                roots.append(link_id)
        if len(roots) != 1:
            issues.append(
                ValidationIssue(
                    "AMBIGUOUS_LIMB_ROOT",
                    tok,
                    f"label must cover one connected subtree, found roots {sorted(roots)}",
                )
            )
            continue
        limbs[tok] = roots[0]
        covered = set(tree.descend_links(roots[0]))
        if covered != members:
            issues.append(
                ValidationIssue(
                    "LIMB_COVER_MISMATCH",
                    tok,
                    f"labeled links {sorted(members)} != subtree of {roots[0]!r}",
                )
            )

    labels = LabelSets(
        core={k: tuple(sorted(v)) for k, v in sorted(core.items())},
        limbs=limbs,
        distals=dict(sorted(distals.items())),
    )
    platform = PlatformDescription(
        name=name,
        tree=tree,
        joint_space=_build_joint_space(tree),
        labels=labels,
        com_link=com_link,
        locomotion=locomotion,
        translation_quantum=quantum,
    )
    return platform, issues + validate(platform)


# --- label derivation --------------------------------------------------------

def derive_labels(tree: KinematicTree, core_links: Iterable[str]) -> LabelSets:
    """Assign the hierarchical labels implied by the structure.

    Chains leaving the core are numbered by BFS order over core links (root
    first), then lexicographic joint name.  Walking outward, consecutive
    actuated joints separated only by links without effective extent share a
    joint location; a link with extent closes the location and the next
    actuated joint starts the next depth.
    """
    core_set = set(core_links)
    if not core_set:
        raise DisconnectedCore("core link set is empty")
    for link_id in core_set:
        if link_id not in tree.link_by_id:
            raise UnknownLabel(f"unknown core link {link_id!r}")
    root = tree.root_link
    if root not in core_set:
        raise DisconnectedCore(f"root link {root!r} is not in the core")

    # BFS restricted to core members; everything in the set must be reached.
    core_order = [root]
    q = deque([root])
    while q:
        cur = q.popleft()
        for j in tree.child_joints.get(cur, ()):
            if j.child_link in core_set:
                core_order.append(j.child_link)
                q.append(j.child_link)
    if len(core_order) != len(core_set):
        stranded = sorted(core_set - set(core_order))
        raise DisconnectedCore(f"core links not connected to the root: {stranded}")

    core = {f"c_{i}": (link_id,) for i, link_id in enumerate(core_order, start=1)}

    distals: dict[str, str] = {}
    limbs: dict[str, str] = {}
    internal_n = 0
    chain_n = 0
    for core_link in core_order:
        for j in tree.child_joints.get(core_link, ()):
            if j.child_link in core_set:
                if j.actuated:
                    internal_n += 1
                    distals[f"distal_{internal_n}"] = j.joint_id
                continue
            chain_n += 1
            if chain_n > 9:
                raise LabelingError("more than 9 chains leave the core")
            _label_chain(tree, j, chain_n, distals, limbs)
    return LabelSets(
        core=core,
        limbs=dict(sorted(limbs.items())),
        distals=dict(sorted(distals.items())),
    )


def _label_chain(tree, first_joint, chain_n, distals, limbs):
    items = []
    joint = first_joint
    while True:
        items.append(joint)
        children = tree.child_joints.get(joint.child_link, ())
        if not children:
            break
        if len(children) > 1:
            raise LabelingError(
                f"link {joint.child_link!r} branches; chains must be serial"
            )
        joint = children[0]

    depth = 0
    segment: list[Joint] = []
    for i, j in enumerate(items):
        segment.append(j)
        last = i == len(items) - 1
        boundary = last or tree.effective_extent(j.child_link) > EXTENT_EPS
        if boundary and any(s.actuated for s in segment):
            depth += 1
            if depth > 9:
                raise LabelingError(f"chain {chain_n} has more than 9 joint locations")
            head = next(s for s in segment if s.actuated)
            distals[f"distal_{chain_n}{depth}"] = head.joint_id
            limbs[f"limb_{chain_n}{depth}"] = head.child_link
            segment = []


def assemble_platform(
    name: str,
    tree: KinematicTree,
    core_links: Iterable[str],
    *,
    com_link: Optional[str] = None,
    locomotion: str = "none",
    translation_quantum: Optional[float] = None,
) -> PlatformDescription:
    """Derive labels for a bare tree and wrap everything up, validated."""
    labels = derive_labels(tree, core_links)
    platform = PlatformDescription(
        name=name,
        tree=tree,
        joint_space=_build_joint_space(tree),
        labels=labels,
        com_link=com_link if com_link is not None else tree.root_link,
        locomotion=locomotion,
        translation_quantum=translation_quantum,
    )
    issues = validate(platform)
    if issues:
        first = issues[0]
        raise LabelingError(f"{first.code} ({first.subject}): {first.message}")
    return platform


# --- subtree and validation --------------------------------------------------

def subtree(platform: PlatformDescription, label: str) -> Subtree:
    """Closed set of links and actuated joints under a limb or core label."""
    tree = platform.tree
    labels = platform.labels
    if label in labels.core:
        links = labels.core_links
    elif label in labels.limbs:
        links = frozenset(tree.descend_links(labels.limbs[label]))
    else:
        raise UnknownLabel(f"{label!r} is not a limb or core label")
    joints = set()
    for link_id in links:
        pj = tree.link_by_id[link_id].parent_joint
        if pj is None:
            continue
        j = tree.joint_by_id[pj]
        if not j.actuated:
            continue
        if label in labels.core and j.parent_link not in links:
            continue
        joints.add(pj)
    return Subtree(links=links, joints=frozenset(joints))


def _limb_index(label: str) -> tuple[int, int]:
    m = _LIMB_RE.match(label)
    return int(m.group(1)), int(m.group(2))


def validate(platform: PlatformDescription) -> list[ValidationIssue]:
    """Check every structural and labeling invariant; empty list = valid."""
    issues: list[ValidationIssue] = []
    tree = platform.tree
    labels = platform.labels

    for dim in platform.joint_space.dims:
        if not dim.limit_min < dim.limit_max:
            issues.append(
                ValidationIssue(
                    "EMPTY_JOINT_RANGE",
                    dim.joint_id,
                    f"limits [{dim.limit_min}, {dim.limit_max}] admit no motion",
                )
            )
        if dim.increment <= 0:
            issues.append(
                ValidationIssue(
                    "NONPOSITIVE_INCREMENT", dim.joint_id, f"increment {dim.increment}"
                )
            )
        if not dim.limit_min <= dim.neutral <= dim.limit_max:
            issues.append(
                ValidationIssue(
                    "NEUTRAL_OUT_OF_RANGE",
                    dim.joint_id,
                    f"neutral {dim.neutral} outside [{dim.limit_min}, {dim.limit_max}]",
                )
            )

    expected_dims = tuple(
        j.joint_id for j in sorted(tree.joints, key=lambda j: j.joint_id) if j.actuated
    )
    if tuple(d.joint_id for d in platform.joint_space.dims) != expected_dims:
        issues.append(
            ValidationIssue(
                "JOINT_SPACE_MISMATCH",
                platform.name,
                "joint space does not list the actuated joints in id order",
            )
        )

    core_links = labels.core_links
    for label, members in labels.core.items():
        for link_id in members:
            if link_id not in tree.link_by_id:
                issues.append(
                    ValidationIssue("UNKNOWN_LINK_REF", label, f"no link {link_id!r}")
                )

    if platform.com_link is None:
        issues.append(
            ValidationIssue(
                "MISSING_COM", platform.name, "no link carries contains_com"
            )
        )
    elif platform.com_link not in core_links:
        issues.append(
            ValidationIssue(
                "COM_NOT_IN_CORE",
                platform.com_link,
                "center-of-mass link is not part of the core",
            )
        )

    limb_subtrees: dict[str, frozenset[str]] = {}
    for label, root in labels.limbs.items():
        if root not in tree.link_by_id:
            issues.append(
                ValidationIssue("UNKNOWN_LINK_REF", label, f"no link {root!r}")
            )
            continue
        limb_subtrees[label] = frozenset(tree.descend_links(root))
        c, d = _limb_index(label)
        pair = f"distal_{c}{d}"
        if pair not in labels.distals:
            issues.append(
                ValidationIssue("ORPHAN_LIMB", label, f"no matching {pair}")
            )
        else:
            joint_id = labels.distals[pair]
            joint = tree.joint_by_id.get(joint_id)
            if joint is None:
                issues.append(
                    ValidationIssue("UNKNOWN_JOINT_REF", pair, f"no joint {joint_id!r}")
                )
            elif joint.child_link != root or not joint.actuated:
                issues.append(
                    ValidationIssue(
                        "PAIRING_VIOLATION",
                        pair,
                        f"{joint_id!r} is not the proximal actuated joint of {label}",
                    )
                )
        if limb_subtrees[label] & core_links:
            issues.append(
                ValidationIssue(
                    "CORE_OVERLAP", label, "limb subtree reaches into the core"
                )
            )

    for label in labels.distals:
        joint_id = labels.distals[label]
        if joint_id not in tree.joint_by_id:
            issues.append(
                ValidationIssue("UNKNOWN_JOINT_REF", label, f"no joint {joint_id!r}")
            )

    for label, links in limb_subtrees.items():
        c, d = _limb_index(label)
        deeper = f"limb_{c}{d + 1}"
        if deeper in limb_subtrees and not limb_subtrees[deeper] < links:
            issues.append(
                ValidationIssue(
                    "NESTING_VIOLATION",
                    deeper,
                    f"subtree of {deeper} is not strictly inside {label}",
                )
            )

    ordered = sorted(limb_subtrees)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            sa, sb = limb_subtrees[a], limb_subtrees[b]
            if sa & sb and not (sa <= sb or sb <= sa):
                issues.append(
                    ValidationIssue(
                        "OVERLAP_VIOLATION",
                        f"{a}/{b}",
                        "limb subtrees overlap without nesting",
                    )
                )

    covered = set(core_links)
    for label, links in limb_subtrees.items():
        if _limb_index(label)[1] == 1:
            covered.update(links)
    gap = sorted(l.link_id for l in tree.links if l.link_id not in covered)
    if gap:
        issues.append(
            ValidationIssue(
                "COVERAGE_GAP", platform.name, f"links outside core and limbs: {gap}"
            )
        )

    return issues


# --- canonical serialization -------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def _link_tokens(platform: PlatformDescription, link_id: str) -> list[str]:
    toks = [lab for lab, members in platform.labels.core.items() if link_id in members]
    for lab in platform.labels.limbs:
        root = platform.labels.limbs[lab]
        if link_id in platform.tree.descend_links(root):
            toks.append(lab)
    return sorted(toks)


def serialize_eurdf(platform: PlatformDescription) -> str:
    """Canonical text form: elements sorted by id, stable float formatting.

    parse_eurdf(serialize_eurdf(p)) == p, and equal platforms serialize to
    byte-identical documents.
    """
    tree = platform.tree
    joint_of_label = {v: k for k, v in platform.labels.distals.items()}
    out = [f'<robot name="{platform.name}">']
    if platform.locomotion != "none":
        out.append(f'  <locomotion mode="{platform.locomotion}"/>')
    if platform.translation_quantum is not None:
        out.append(f'  <translation_quantum value="{_fmt(platform.translation_quantum)}"/>')
    for link in sorted(tree.links, key=lambda l: l.link_id):
        com = ' contains_com="true"' if link.link_id == platform.com_link else ""
        out.append(f'  <link name="{link.link_id}"{com}>')
        if link.geometry_extent is not None:
            out.append(f'    <extent value="{_fmt(link.geometry_extent)}"/>')
        tokens = _link_tokens(platform, link.link_id)
        out.append(f"    <body_part>{' '.join(tokens)}</body_part>")
        out.append("  </link>")
    for j in sorted(tree.joints, key=lambda j: j.joint_id):
        out.append(f'  <joint name="{j.joint_id}" type="{j.type}">')
        out.append(f'    <parent link="{j.parent_link}"/>')
        out.append(f'    <child link="{j.child_link}"/>')
        xyz = " ".join(_fmt(v) for v in j.origin_xyz)
        rpy = " ".join(_fmt(v) for v in j.origin_rpy)
        out.append(f'    <origin xyz="{xyz}" rpy="{rpy}"/>')
        axis = " ".join(_fmt(v) for v in j.axis)
        out.append(f'    <axis xyz="{axis}"/>')
        if j.actuated:
            out.append(
                f'    <limit lower="{_fmt(j.limit_min)}" upper="{_fmt(j.limit_max)}"/>'
            )
            if j.increment != DEFAULT_INCREMENT:
                out.append(f'    <increment value="{_fmt(j.increment)}"/>')
            default_neutral = 0.0 if j.limit_min <= 0.0 <= j.limit_max else (
                (j.limit_min + j.limit_max) / 2.0
            )
            if j.neutral != default_neutral:
                out.append(f'    <neutral value="{_fmt(j.neutral)}"/>')
        label = joint_of_label.get(j.joint_id)
        if label is not None:
            out.append(f"    <body_part>{label}</body_part>")
        out.append("  </joint>")
    out.append("</robot>")
    out.append("")
    return "\n".join(out)
