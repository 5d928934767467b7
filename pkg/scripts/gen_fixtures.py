"""Regenerate the shipped platform fixtures.

Trees are authored here as data; labels come from derive_labels so the files
always agree with the automatic convention.  Run from the repo root:

    python scripts/gen_fixtures.py
"""
from __future__ import annotations

import pathlib

from kinesphere.eurdf import (
    Joint,
    KinematicTree,
    Link,
    LabelSets,
    PlatformDescription,
    assemble_platform,
    serialize_eurdf,
    validate,
)
from kinesphere.eurdf import _build_joint_space  # fixture assembly only

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "kinesphere" / "fixtures"

INC = 0.01  # actuator resolution shared by every fixture joint


def _tree(links, joints):
    parent_of = {j.child_link: j.joint_id for j in joints}
    links = [
        Link(link_id=n, name=n, geometry_extent=ext, parent_joint=parent_of.get(n))
        for n, ext in links
    ]
    return KinematicTree(links=tuple(links), joints=tuple(joints))


def _joint(name, parent, child, xyz=(0.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0),
           limits=(-3.14, 3.14), jtype="revolute", rpy=(0.0, 0.0, 0.0)):
    return Joint(
        joint_id=name, name=name, type=jtype, parent_link=parent, child_link=child,
        origin_xyz=xyz, origin_rpy=rpy, axis=axis,
        limit_min=limits[0], limit_max=limits[1], increment=INC,
        neutral=0.0 if limits[0] <= 0.0 <= limits[1] else (limits[0] + limits[1]) / 2.0,
    )


def _tip(name, parent, xyz):
    """Massless frame at the physical end of a chain; limb endpoints track it."""
    return _joint(name, parent, f"{parent}_tip", xyz=xyz, jtype="fixed",
                  limits=(0.0, 0.0))


def fig3_example():
    links = [
        ("pelvis", None), ("chest", None),
        ("paddle", 0.3), ("paddle_tip", None),
        ("arm_b_upper", None), ("arm_b_fore", None), ("arm_b_hand", 0.12),
        ("arm_b_hand_tip", None),
    ]
    joints = [
        _joint("waist", "pelvis", "chest", xyz=(0.0, 0.0, 0.3), axis=(0.0, 0.0, 1.0),
               limits=(-1.57, 1.57)),
        _joint("arm_a_shoulder", "chest", "paddle", xyz=(0.12, 0.0, 0.1),
               axis=(0.0, 1.0, 0.0), limits=(-2.0, 2.0)),
        _tip("arm_a_tip", "paddle", (0.0, 0.0, 0.3)),
        _joint("arm_b_shoulder", "chest", "arm_b_upper", xyz=(-0.12, 0.0, 0.1),
               axis=(0.0, 1.0, 0.0), limits=(-2.0, 2.0)),
        _joint("arm_b_elbow", "arm_b_upper", "arm_b_fore", xyz=(0.0, 0.0, -0.25),
               axis=(1.0, 0.0, 0.0), limits=(-2.2, 2.2)),
        _joint("arm_b_wrist", "arm_b_fore", "arm_b_hand", xyz=(0.0, 0.0, -0.25),
               axis=(0.0, 1.0, 0.0), limits=(-1.8, 1.8)),
        _tip("arm_b_tip", "arm_b_hand", (0.0, 0.0, -0.12)),
    ]
    return assemble_platform("fig3_example", _tree(links, joints), ["pelvis", "chest"],
                             com_link="pelvis")


def _arm7(side, sx):
    p = f"arm_{side}"
    links = [
        (f"{p}_shoulder_mount", None), (f"{p}_upper", None), (f"{p}_elbow_mount", None),
        (f"{p}_fore", None), (f"{p}_wrist_mount_a", None), (f"{p}_wrist_mount_b", None),
        (f"{p}_hand", 0.15), (f"{p}_hand_tip", None),
    ]
    lo_roll, hi_roll = (-1.0, 2.2) if side == "left" else (-2.2, 1.0)
    # Wrist: differential pitch pair with a deliberately tight range plus a
    # hand roll whose axis runs through the tip, so the hand segment on its
    # own covers only a narrow cone of pulls.
    lo_w, hi_w = (-0.02, 0.22) if side == "left" else (-0.22, 0.02)
    joints = [
        _joint(f"{p}_s0", "torso", f"{p}_shoulder_mount", xyz=(sx, 0.0, 0.65),
               axis=(0.0, 0.0, 1.0), limits=(-1.7, 1.7)),
        _joint(f"{p}_s1", f"{p}_shoulder_mount", f"{p}_upper",
               axis=(0.0, 1.0, 0.0), limits=(lo_roll, hi_roll)),
        _joint(f"{p}_e0", f"{p}_upper", f"{p}_elbow_mount", xyz=(0.0, 0.0, -0.35),
               axis=(0.0, 0.0, 1.0), limits=(-3.0, 3.0)),
        _joint(f"{p}_e1", f"{p}_elbow_mount", f"{p}_fore",
               axis=(1.0, 0.0, 0.0), limits=(-2.6, 0.05)),
        _joint(f"{p}_w0", f"{p}_fore", f"{p}_wrist_mount_a", xyz=(0.0, 0.0, -0.3),
               axis=(0.0, 1.0, 0.0), limits=(lo_w, hi_w)),
        _joint(f"{p}_w1", f"{p}_wrist_mount_a", f"{p}_wrist_mount_b",
               axis=(0.0, 1.0, 0.0), limits=(lo_w, hi_w)),
        _joint(f"{p}_w2", f"{p}_wrist_mount_b", f"{p}_hand",
               axis=(0.0, 0.0, 1.0), limits=(-3.0, 3.0)),
        _tip(f"{p}_tip", f"{p}_hand", (0.0, 0.0, -0.15)),
    ]
    return links, joints


def baxter():
    links = [("torso", None)]
    joints = []
    for side, sx in (("left", 0.25), ("right", -0.25)):
        l, j = _arm7(side, sx)
        links += l
        joints += j
    return assemble_platform("baxter", _tree(links, joints), ["torso"])


def _nao_arm(side, sx):
    p = f"arm_{side}"
    links = [
        (f"{p}_shoulder_mount", None), (f"{p}_upper", None), (f"{p}_elbow_mount_a", None),
        (f"{p}_elbow_mount_b", None), (f"{p}_wrist_mount", None), (f"{p}_hand", 0.11),
        (f"{p}_hand_tip", None),
    ]
    lo_roll, hi_roll = (-0.45, 1.55) if side == "left" else (-1.55, 0.45)
    lo_er, hi_er = (-1.55, 0.05) if side == "left" else (-0.05, 1.55)
    joints = [
        _joint(f"{p}_shoulder_pitch", "torso", f"{p}_shoulder_mount",
               xyz=(sx, 0.0, 0.1), axis=(1.0, 0.0, 0.0), limits=(-2.08, 2.08)),
        _joint(f"{p}_shoulder_roll", f"{p}_shoulder_mount", f"{p}_upper",
               axis=(0.0, 1.0, 0.0), limits=(lo_roll, hi_roll)),
        _joint(f"{p}_elbow_yaw", f"{p}_upper", f"{p}_elbow_mount_a",
               xyz=(0.0, 0.0, -0.105), axis=(0.0, 0.0, 1.0), limits=(-2.08, 2.08)),
        _joint(f"{p}_elbow_roll", f"{p}_elbow_mount_a", f"{p}_elbow_mount_b",
               axis=(1.0, 0.0, 0.0), limits=(lo_er, hi_er)),
        _joint(f"{p}_wrist_yaw", f"{p}_elbow_mount_b", f"{p}_wrist_mount",
               axis=(0.0, 0.0, 1.0), limits=(-1.82, 1.82)),
        _joint(f"{p}_hand", f"{p}_wrist_mount", f"{p}_hand",
               axis=(0.0, 1.0, 0.0), limits=(-0.5, 0.5)),
        _tip(f"{p}_tip", f"{p}_hand", (0.0, 0.0, -0.11)),
    ]
    return links, joints


def _nao_leg(side, sx):
    p = f"leg_{side}"
    links = [
        (f"{p}_hip_mount_a", None), (f"{p}_hip_mount_b", None), (f"{p}_thigh", None),
        (f"{p}_shin", None), (f"{p}_ankle_mount", None), (f"{p}_foot", 0.146),
        (f"{p}_foot_tip", None),
    ]
    joints = [
        _joint(f"{p}_hip_yaw", "torso", f"{p}_hip_mount_a", xyz=(sx, 0.0, -0.085),
               axis=(0.0, 0.0, 1.0), limits=(-1.14, 0.74)),
        _joint(f"{p}_hip_roll", f"{p}_hip_mount_a", f"{p}_hip_mount_b",
               axis=(0.0, 1.0, 0.0), limits=(-0.38, 0.79)),
        _joint(f"{p}_hip_pitch", f"{p}_hip_mount_b", f"{p}_thigh",
               axis=(1.0, 0.0, 0.0), limits=(-1.77, 0.48)),
        _joint(f"{p}_knee_pitch", f"{p}_thigh", f"{p}_shin", xyz=(0.0, 0.0, -0.1),
               axis=(1.0, 0.0, 0.0), limits=(-0.09, 2.11)),
        _joint(f"{p}_ankle_pitch", f"{p}_shin", f"{p}_ankle_mount",
               axis=(1.0, 0.0, 0.0), limits=(-1.18, 0.92)),
        _joint(f"{p}_ankle_roll", f"{p}_ankle_mount", f"{p}_foot",
               axis=(0.0, 1.0, 0.0), limits=(-0.4, 0.77)),
        _tip(f"{p}_tip", f"{p}_foot", (0.0, 0.146, 0.0)),
    ]
    return links, joints


def nao():
    links = [("torso", None), ("neck_mount", None), ("head", 0.12),
             ("head_tip", None)]
    joints = [
        _joint("neck_yaw", "torso", "neck_mount", xyz=(0.0, 0.0, 0.125),
               axis=(0.0, 0.0, 1.0), limits=(-2.08, 2.08)),
        _joint("neck_pitch", "neck_mount", "head",
               axis=(0.0, 1.0, 0.0), limits=(-1.2, 1.2)),
        _tip("neck_tip", "head", (0.0, 0.0, 0.12)),
    ]
    for build, side, sx in (
        (_nao_arm, "left", 0.098), (_nao_arm, "right", -0.098),
        (_nao_leg, "left", 0.05), (_nao_leg, "right", -0.05),
    ):
        l, j = build(side, sx)
        links += l
        joints += j
    return assemble_platform("nao", _tree(links, joints), ["torso"],
                             locomotion="legged")


def youbot():
    links = [
        ("base", None),
        ("arm_mount", None), ("arm_upper", None), ("arm_fore", None),
        ("arm_wrist_mount", None), ("arm_gripper", 0.1), ("arm_gripper_tip", None),
    ]
    joints = [
        _joint("arm_j1", "base", "arm_mount", xyz=(0.0, 0.14, 0.13),
               axis=(0.0, 0.0, 1.0), limits=(-2.94, 2.94)),
        _joint("arm_j2", "arm_mount", "arm_upper",
               axis=(1.0, 0.0, 0.0), limits=(-1.13, 1.57)),
        _joint("arm_j3", "arm_upper", "arm_fore", xyz=(0.0, 0.0, 0.155),
               axis=(1.0, 0.0, 0.0), limits=(-2.54, 2.54)),
        _joint("arm_j4", "arm_fore", "arm_wrist_mount", xyz=(0.0, 0.0, 0.135),
               axis=(1.0, 0.0, 0.0), limits=(-1.78, 1.78)),
        _joint("arm_j5", "arm_wrist_mount", "arm_gripper",
               axis=(0.0, 0.0, 1.0), limits=(-2.91, 2.91)),
        _tip("arm_tip", "arm_gripper", (0.0, 0.0, 0.1)),
    ]
    return assemble_platform("youbot", _tree(links, joints), ["base"],
                             locomotion="wheeled")


def khepera():
    links = [("body", None), ("wheel_left", None), ("wheel_right", None)]
    joints = [
        _joint("wheel_left_joint", "body", "wheel_left", xyz=(0.028, 0.0, -0.01),
               axis=(1.0, 0.0, 0.0), limits=(-3.14, 3.14)),
        _joint("wheel_right_joint", "body", "wheel_right", xyz=(-0.028, 0.0, -0.01),
               axis=(1.0, 0.0, 0.0), limits=(-3.14, 3.14)),
    ]
    tree = _tree(links, joints)
    # Whole document is core; wheel joints stay unlabeled.
    labels = LabelSets(core={"c_1": ("body", "wheel_left", "wheel_right")},
                       limbs={}, distals={})
    platform = PlatformDescription(
        name="khepera", tree=tree, joint_space=_build_joint_space(tree),
        labels=labels, com_link="body", locomotion="wheeled",
    )
    issues = validate(platform)
    assert not issues, issues
    return platform


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for build in (fig3_example, baxter, nao, youbot, khepera):
        platform = build()
        path = OUT / f"{platform.name}.eurdf"
        path.write_text(serialize_eurdf(platform))
        print(f"{path.name}: M={platform.joint_space.m} "
              f"C={sorted(platform.labels.core)} L={len(platform.labels.limbs)} "
              f"J={len(platform.labels.distals)}")


if __name__ == "__main__":
    main()
