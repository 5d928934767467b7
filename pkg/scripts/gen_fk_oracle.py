"""Generate frozen forward-kinematics expectations for the oracle fixtures.

Positions are computed here by plain homogeneous-matrix composition on top
of scipy rotations, sharing no code with the package kernels.  The fixture
geometry is restated numerically below; if the checked-in fixture files
drift from these tables the oracle test fails, which is the point.

Writes tests/data/fk_oracle.json.  Rerun only when the oracle fixtures
change shape.
"""

import json
import pathlib

import numpy as np
from scipy.spatial.transform import Rotation

from kinesphere.eurdf import (
    Joint,
    KinematicTree,
    Link,
    assemble_platform,
    serialize_eurdf,
)

ROOT = pathlib.Path(__file__).resolve().parent.parent

# Effective lengths for the fixture files; FK ignores them.
EXTENTS = {"upper": 0.4, "fore": 0.3, "carriage": 0.2, "rod": 0.25}

# (joint, parent link, child link, xyz, rpy, type, axis, limits, neutral)
TWOLINK = [
    ("j1", "base", "upper", (0.05, 0.0, 0.1), (0.1, 0.2, 0.3),
     "revolute", (0.0, 0.0, 1.0), (-2.0, 2.0), 0.1),
    ("j2", "upper", "fore", (0.0, 0.0, 0.4), (0.0, -0.15, 0.0),
     "revolute", (0.0, 1.0, 0.0), (-2.5, 2.5), -0.2),
    ("j_tip", "fore", "tip", (0.0, 0.02, 0.3), (0.0, 0.0, 0.0),
     "fixed", (0.0, 0.0, 1.0), (0.0, 0.0), 0.0),
]

SLIDER = [
    ("s1", "base", "carriage", (0.0, 0.1, 0.05), (0.0, 0.0, 0.5),
     "prismatic", (1.0, 0.0, 0.0), (-0.6, 0.6), 0.05),
    ("s2", "carriage", "rod", (0.2, 0.0, 0.0), (0.3, 0.0, 0.0),
     "revolute", (0.0, 0.0, 1.0), (-1.5, 1.5), 0.0),
    ("s_tip", "rod", "rod_tip", (0.0, 0.25, 0.0), (0.0, 0.0, 0.0),
     "fixed", (0.0, 0.0, 1.0), (0.0, 0.0), 0.0),
]


def _transform(xyz, rpy, jtype, axis, q):
    T = np.eye(4)
    T[:3, 3] = xyz
    T[:3, :3] = Rotation.from_euler("xyz", rpy).as_matrix()
    M = np.eye(4)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    if jtype == "revolute":
        M[:3, :3] = Rotation.from_rotvec(a * q).as_matrix()
    elif jtype == "prismatic":
        M[:3, 3] = a * q
    return T @ M


def _positions(table, q_by_joint):
    world = {"base": np.eye(4)}
    for joint, parent, child, xyz, rpy, jtype, axis, limits, neutral in table:
        q = q_by_joint.get(joint, 0.0)
        world[child] = world[parent] @ _transform(xyz, rpy, jtype, axis, q)
    return {link: world[link][:3, 3] for link in world}


def _sample(table, n, rng):
    actuated = [(j, lo, hi) for j, _, _, _, _, t, _, (lo, hi), _ in table
                if t != "fixed"]
    joint_ids = [j for j, _, _ in actuated]
    poses = []
    positions = {child: [] for _, _, child, *_ in table}
    positions["base"] = []
    for _ in range(n):
        q = [rng.uniform(lo, hi) for _, lo, hi in actuated]
        poses.append(q)
        pos = _positions(table, dict(zip(joint_ids, q)))
        for link, p in pos.items():
            positions[link].append([float(x) for x in p])
    return {"joint_ids": joint_ids, "poses": poses, "positions": positions}


def _platform(name, table):
    joints = []
    for joint, parent, child, xyz, rpy, jtype, axis, (lo, hi), neutral in table:
        joints.append(Joint(
            joint_id=joint, name=joint, type=jtype, parent_link=parent,
            child_link=child, origin_xyz=xyz, origin_rpy=rpy, axis=axis,
            limit_min=lo, limit_max=hi, increment=0.01, neutral=neutral,
        ))
    parent_of = {j.child_link: j.joint_id for j in joints}
    link_ids = ["base"] + [row[2] for row in table]
    links = tuple(
        Link(link_id=l, name=l, geometry_extent=EXTENTS.get(l),
             parent_joint=parent_of.get(l))
        for l in link_ids
    )
    return assemble_platform(name, KinematicTree(links=links, joints=tuple(joints)),
                             ["base"], com_link="base")


def main():
    rng = np.random.default_rng(20260822)
    out = {
        "twolink": _sample(TWOLINK, 100, rng),
        "slider": _sample(SLIDER, 100, rng),
    }
    data_dir = ROOT / "tests" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    path = data_dir / "fk_oracle.json"
    path.write_text(json.dumps(out) + "\n")
    print(f"wrote {path}")
    for name, table in (("twolink", TWOLINK), ("slider", SLIDER)):
        fixture = data_dir / f"{name}.eurdf"
        fixture.write_text(serialize_eurdf(_platform(name, table)))
        print(f"wrote {fixture}")


if __name__ == "__main__":
    main()
