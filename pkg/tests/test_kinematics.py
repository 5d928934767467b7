import json
import math
import warnings

import numpy as np
import pytest

from kinesphere.ecl import EclStore, export_store
from kinesphere.errors import (
    FormatError,
    InstallFailure,
    SupportMismatch,
    UnknownOrigin,
    ZeroDirection,
)
from kinesphere.eurdf import (
    Joint,
    KinematicTree,
    Link,
    assemble_platform,
    parse_eurdf,
    subtree,
)
from kinesphere.kinematics import (
    InstallConfig,
    articulation_pairs,
    auto_install,
    forward_kinematics,
    limb_endpoint,
    limb_reach,
    record_install,
    verify_direction,
)
from kinesphere.vsam import PLACE_MIDDLE, build_vsam, laban26, parse_direction

from .conftest import DATA, default_spec, load_platform

PLACE_HIGH = parse_direction("place-high")
LEFT_HIGH = parse_direction("left-high")


# -- forward kinematics -------------------------------------------------------

@pytest.mark.parametrize("name", ["twolink", "slider"])
def test_fk_matches_independent_oracle(name):
    oracle = json.loads((DATA / "fk_oracle.json").read_text())[name]
    platform = parse_eurdf((DATA / f"{name}.eurdf").read_text())
    assert [d.joint_id for d in platform.joint_space.dims] == oracle["joint_ids"]
    worst = 0.0
    for i, q in enumerate(oracle["poses"]):
        frames = forward_kinematics(platform, q)
        for link, expected in oracle["positions"].items():
            err = np.abs(frames[link].translation - np.array(expected[i])).max()
            worst = max(worst, float(err))
    assert worst < 1e-9


def _planar_two_link(l1=0.4, l2=0.3):
    joints = (
        Joint(joint_id="j1", name="j1", type="revolute", parent_link="base",
              child_link="upper", origin_xyz=(0.0, 0.0, 0.0),
              axis=(1.0, 0.0, 0.0), limit_min=-3.0, limit_max=3.0,
              increment=0.01),
        Joint(joint_id="j2", name="j2", type="revolute", parent_link="upper",
              child_link="fore", origin_xyz=(0.0, 0.0, l1),
              axis=(1.0, 0.0, 0.0), limit_min=-3.0, limit_max=3.0,
              increment=0.01),
        Joint(joint_id="j3", name="j3", type="fixed", parent_link="fore",
              child_link="tip", origin_xyz=(0.0, 0.0, l2),
              limit_min=0.0, limit_max=0.0),
    )
    links = (
        Link(link_id="base", name="base"),
        Link(link_id="upper", name="upper", geometry_extent=l1, parent_joint="j1"),
        Link(link_id="fore", name="fore", geometry_extent=l2, parent_joint="j2"),
        Link(link_id="tip", name="tip", parent_joint="j3"),
    )
    return assemble_platform("planar", KinematicTree(links=links, joints=joints),
                             ["base"])


def test_fk_closed_form_planar():
    """Rotations about x move the chain in the y-z plane: y = -l sin, z = l cos."""
    platform = _planar_two_link()
    for q1, q2 in [(0.0, 0.0), (0.3, -0.7), (1.2, 0.4), (-2.0, 1.9)]:
        frames = forward_kinematics(platform, (q1, q2))
        y = -0.4 * math.sin(q1) - 0.3 * math.sin(q1 + q2)
        z = 0.4 * math.cos(q1) + 0.3 * math.cos(q1 + q2)
        assert frames["tip"].translation == pytest.approx((0.0, y, z), abs=1e-12)


def test_fk_unbound_joints_sit_at_neutral():
    platform = load_platform("fig3_example")
    neutral = forward_kinematics(platform, platform.neutral_pose())
    unbound = forward_kinematics(platform, (None,) * platform.joint_space.m)
    for link in neutral:
        assert np.array_equal(neutral[link].translation, unbound[link].translation)


def test_fk_rotation_is_orthonormal():
    platform = load_platform("baxter")
    frames = forward_kinematics(platform, platform.neutral_pose())
    for ft in frames.values():
        assert np.allclose(ft.rotation @ ft.rotation.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(ft.rotation) == pytest.approx(1.0)


# -- endpoints and reach ------------------------------------------------------

def test_limb_endpoint_tracks_tip_frame():
    platform = _planar_two_link()
    ep = limb_endpoint(platform, "limb_11", (0.0, 0.0))
    assert ep == pytest.approx((0.0, 0.0, 0.7))


def test_limb_reach_sums_extents():
    platform = load_platform("fig3_example")
    assert limb_reach(platform, "limb_11") == pytest.approx(0.3)
    assert limb_reach(platform, "limb_21") == pytest.approx(0.62)
    assert limb_reach(platform, "limb_23") == pytest.approx(0.12)


# -- verification -------------------------------------------------------------

def _fig3_partial(platform, limb, mapping):
    jspace = platform.joint_space
    values = [None] * jspace.m
    for j in subtree(platform, limb).joints:
        values[jspace.index_of[j]] = mapping.get(j, 0.0)
    return tuple(values)


def test_verify_direction_reports_quadrant():
    """arm_a_shoulder swings about y, so its tip moves in the x-z plane."""
    platform = load_platform("fig3_example")
    neutral = platform.neutral_pose()
    pose = _fig3_partial(platform, "limb_11", {"arm_a_shoulder": -0.8})
    report = verify_direction(platform, neutral, pose, "distal_11", "limb_11",
                              parse_direction("right-low"))
    assert report.magnitude > 0.0
    assert report.displacement[0] < 0.0
    assert report.displacement[2] < 0.0
    assert report.cosine > 0.7


def test_verify_direction_zero_displacement_has_zero_cosine():
    platform = load_platform("fig3_example")
    neutral = platform.neutral_pose()
    pose = _fig3_partial(platform, "limb_11", {})
    report = verify_direction(platform, neutral, pose, "distal_11", "limb_11",
                              PLACE_HIGH)
    assert report.magnitude == 0.0
    assert report.cosine == 0.0


def test_verify_direction_place_middle_rejected():
    platform = load_platform("fig3_example")
    with pytest.raises(ZeroDirection):
        verify_direction(platform, platform.neutral_pose(),
                         _fig3_partial(platform, "limb_11", {}),
                         "distal_11", "limb_11", PLACE_MIDDLE)


def test_verify_direction_support_mismatch():
    platform = load_platform("fig3_example")
    pose = _fig3_partial(platform, "limb_22", {})
    with pytest.raises(SupportMismatch):
        verify_direction(platform, platform.neutral_pose(), pose,
                         "distal_21", "limb_21", PLACE_HIGH)


# -- installer ----------------------------------------------------------------

SMALL = InstallConfig(restarts=4, iterations=40, seed=3)


def test_articulation_pairs_baxter():
    platform = load_platform("baxter")
    pairs = articulation_pairs(platform, sorted(platform.labels.distals))
    assert ("distal_11", "limb_11") in pairs
    assert ("distal_11", "limb_13") in pairs
    assert ("distal_13", "limb_13") in pairs
    assert ("distal_13", "limb_11") not in pairs
    assert ("distal_11", "limb_21") not in pairs


def test_auto_install_deterministic():
    platform = load_platform("fig3_example")
    spec = default_spec(platform)
    a = auto_install(platform, spec, SMALL)
    b = auto_install(platform, spec, SMALL)
    assert a == b
    assert export_store(a) == export_store(b)


def test_auto_install_rows_verify(installed, platforms):
    store = installed["fig3_example"]
    platform = platforms["fig3_example"]
    neutral = platform.neutral_pose()
    for row in store.vsam_rows:
        if row.origin == row.limb:
            continue
        for s in range(1, store.kmax_of(row.origin, row.limb, row.direction) + 1):
            pose = store.query(row.limb, row.origin, row.direction, s)
            report = verify_direction(platform, neutral, pose,
                                      row.origin, row.limb, row.direction)
            assert report.cosine >= 0.7
            assert report.magnitude > 0.0


def test_auto_install_unknown_origin():
    platform = load_platform("fig3_example")
    spec = build_vsam(["distal_11"], laban26(), 3)
    spec = type(spec)(origins=("distal_42",), directions=spec.directions,
                      sizes=spec.sizes)
    with pytest.raises(UnknownOrigin):
        auto_install(platform, spec, SMALL)


def test_auto_install_degenerate_limb_fails():
    """A chain whose endpoint sits on its only joint cannot displace it."""
    joints = (
        Joint(joint_id="j1", name="j1", type="revolute", parent_link="base",
              child_link="arm", origin_xyz=(0.0, 0.0, 0.1),
              axis=(0.0, 1.0, 0.0), limit_min=-2.0, limit_max=2.0,
              increment=0.01),
    )
    links = (
        Link(link_id="base", name="base"),
        Link(link_id="arm", name="arm", geometry_extent=0.3, parent_joint="j1"),
    )
    platform = assemble_platform("stub", KinematicTree(links=links, joints=joints),
                                 ["base"])
    spec = build_vsam(["distal_11"], laban26(), 3, platform=platform)
    with pytest.raises(InstallFailure):
        auto_install(platform, spec, SMALL)


def test_auto_install_mobile_core_rows(installed):
    store = installed["khepera"]
    rows = store.vsam_rows
    assert len(rows) == 8
    assert all(r.origin == r.limb == "c_1" for r in rows)
    assert all(r.direction.vertical == 0 for r in rows)
    assert len(store.pose_rows) == 0


def test_auto_install_fixed_base_has_no_core_rows(installed):
    store = installed["baxter"]
    assert all(r.origin != r.limb for r in store.vsam_rows)


# -- recorded installs --------------------------------------------------------

def _recorded_entries(platform, direction_name="left-high"):
    jspace = platform.joint_space
    idx = {jspace.index_of[j] for j in subtree(platform, "limb_11").joints}
    def full(v):
        return [v if i in idx else None for i in range(jspace.m)]
    return [{
        "origin": "distal_11",
        "limb": "limb_11",
        "direction": direction_name,
        "poses": [full(-0.4), full(-0.8), full(-1.2)],
    }]


def test_record_install_round_trip():
    platform = load_platform("fig3_example")
    spec = default_spec(platform)
    entries = _recorded_entries(platform)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        store = record_install(platform, spec, entries)
    pose = store.query("limb_11", "distal_11", LEFT_HIGH, 2)
    assert [v for v in pose.values if v is not None] == [-0.8]
    assert store.kmax_of("distal_11", "limb_11", LEFT_HIGH) == 3


def test_record_install_accepts_json_text():
    platform = load_platform("fig3_example")
    spec = default_spec(platform)
    store = record_install(platform, spec, json.dumps(_recorded_entries(platform)))
    assert store.kmax_of("distal_11", "limb_11", LEFT_HIGH) == 3


def test_record_install_masks_out_of_support_values():
    platform = load_platform("fig3_example")
    spec = default_spec(platform)
    entries = _recorded_entries(platform)
    waist = platform.joint_space.index_of["waist"]
    entries[0]["poses"][0][waist] = 0.5
    with pytest.warns(UserWarning, match="waist"):
        store = record_install(platform, spec, entries)
    pose = store.query("limb_11", "distal_11", LEFT_HIGH, 1)
    assert pose.values[waist] is None


def test_record_install_rejects_bad_document():
    platform = load_platform("fig3_example")
    spec = default_spec(platform)
    with pytest.raises(FormatError):
        record_install(platform, spec, "{not json")
    with pytest.raises(FormatError):
        record_install(platform, spec, json.dumps({"origin": "x"}))
    with pytest.raises(FormatError):
        record_install(platform, spec, json.dumps([{"origin": "distal_11"}]))
