import json

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from kinesphere.ecl import (
    EclStore,
    PartialPose,
    canonical_json,
    canonical_value,
    export_store,
    import_store,
    join_poses,
)
from kinesphere.errors import (
    DuplicateEntry,
    FormatError,
    IntegrityError,
    InvalidSizeCount,
    JointConflict,
    LimitViolation,
    NoSuchEntry,
    SizeOverflow,
    SupportMismatch,
    UnknownDirectionName,
    UnknownKId,
    UnknownLabel,
    UnknownOrigin,
    ZeroDirection,
)
from kinesphere.eurdf import subtree
from kinesphere.vsam import PLACE_MIDDLE, laban26, parse_direction

from .conftest import default_spec, load_platform

LEFT_HIGH = parse_direction("left-high")
FORWARD = parse_direction("forward-middle")


@pytest.fixture
def fig3():
    return load_platform("fig3_example")


@pytest.fixture
def store(fig3):
    return EclStore(default_spec(fig3), platform=fig3)


def _support_pose(platform, limb, fill):
    jspace = platform.joint_space
    idx = {jspace.index_of[j] for j in subtree(platform, limb).joints}
    return [fill if i in idx else None for i in range(jspace.m)]


# -- canonical values ---------------------------------------------------------

def test_canonical_value_quantizes_to_nine_digits():
    assert canonical_value(0.123456789123) == 0.123456789
    assert canonical_value(1.0) == 1.0


def test_canonical_value_normalizes_negative_zero():
    v = canonical_value(-0.0)
    assert v == 0.0 and str(v) == "0.0"


def test_canonical_value_rejects_non_finite():
    with pytest.raises(FormatError):
        canonical_value(float("nan"))
    with pytest.raises(FormatError):
        canonical_value(float("inf"))


def test_canonical_value_idempotent():
    for v in (0.1, -2.715, 1e-7, 123456.789, -0.333333333333):
        assert canonical_value(canonical_value(v)) == canonical_value(v)


def test_canonical_json_stable_bytes():
    a = canonical_json({"b": 2.0, "a": [1.5, -0.0]})
    b = canonical_json({"a": [1.5, 0.0], "b": 2.0})
    assert a == b
    assert isinstance(a, bytes)


# -- inserts ------------------------------------------------------------------

def test_insert_entry_assigns_monotone_k_ids(store):
    k1 = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    k2 = store.insert_entry("distal_21", "limb_21", LEFT_HIGH)
    assert k2 > k1


def test_insert_entry_duplicate_triple(store):
    store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    with pytest.raises(DuplicateEntry):
        store.insert_entry("distal_11", "limb_11", LEFT_HIGH)


def test_insert_entry_place_middle_rejected(store):
    with pytest.raises(ZeroDirection):
        store.insert_entry("distal_11", "limb_11", PLACE_MIDDLE)


def test_insert_entry_unknown_direction(fig3):
    spec = default_spec(fig3)
    narrow = EclStore(
        type(spec)(origins=spec.origins, directions=frozenset([LEFT_HIGH]),
                   sizes=spec.sizes),
        platform=fig3,
    )
    with pytest.raises(UnknownDirectionName):
        narrow.insert_entry("distal_11", "limb_11", FORWARD)


def test_insert_entry_unknown_origin_is_unknown_label(store):
    with pytest.raises(UnknownOrigin) as exc_info:
        store.insert_entry("distal_99", "limb_11", LEFT_HIGH)
    assert isinstance(exc_info.value, UnknownLabel)


def test_insert_entry_unknown_limb(store):
    with pytest.raises(UnknownLabel):
        store.insert_entry("distal_11", "limb_99", LEFT_HIGH)


def test_k_ids_never_reused(store):
    k1 = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    # A fresh triple always gets a fresh id, even after failures.
    with pytest.raises(DuplicateEntry):
        store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    k2 = store.insert_entry("distal_11", "limb_11", FORWARD)
    assert k2 == k1 + 1


# -- appends ------------------------------------------------------------------

def test_append_pose_round_trips_canonical_values(fig3, store):
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    raw = _support_pose(fig3, "limb_11", 0.123456789123)
    p1 = store.append_pose(k, raw)
    assert p1 == 1
    pose = store.query("limb_11", "distal_11", LEFT_HIGH, 1)
    bound = [v for v in pose.values if v is not None]
    assert bound == [0.123456789]


def test_append_pose_unknown_k_id(fig3, store):
    with pytest.raises(UnknownKId):
        store.append_pose(77, _support_pose(fig3, "limb_11", 0.1))


def test_append_pose_support_must_equal_subtree(fig3, store):
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    too_wide = [0.1] * fig3.joint_space.m
    with pytest.raises(SupportMismatch):
        store.append_pose(k, too_wide)
    with pytest.raises(SupportMismatch):
        store.append_pose(k, [None] * fig3.joint_space.m)


def test_append_pose_limit_violation(fig3, store):
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    with pytest.raises(LimitViolation):
        store.append_pose(k, _support_pose(fig3, "limb_11", 99.0))


def test_append_pose_overflow_at_s_max(fig3, store):
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    for s in (1, 2, 3):
        store.append_pose(k, _support_pose(fig3, "limb_11", 0.1 * s))
    with pytest.raises(SizeOverflow) as exc_info:
        store.append_pose(k, _support_pose(fig3, "limb_11", 0.5))
    assert exc_info.value.kmax == 3


def test_append_updates_kmax_map(fig3, store):
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    store.append_pose(k, _support_pose(fig3, "limb_11", 0.1))
    assert store.spec.kmax[("distal_11", LEFT_HIGH.name)] == 1
    store.append_pose(k, _support_pose(fig3, "limb_11", 0.2))
    assert store.spec.kmax[("distal_11", LEFT_HIGH.name)] == 2


# -- queries ------------------------------------------------------------------

def test_query_exact_lookup(fig3, store):
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    store.append_pose(k, _support_pose(fig3, "limb_11", 0.25))
    store.append_pose(k, _support_pose(fig3, "limb_11", 0.5))
    pose = store.query("limb_11", "distal_11", LEFT_HIGH, 2)
    assert [v for v in pose.values if v is not None] == [0.5]


def test_query_missing_triple(store):
    with pytest.raises(NoSuchEntry):
        store.query("limb_11", "distal_11", LEFT_HIGH, 1)


def test_query_size_overflow_reports_kmax(fig3, store):
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    store.append_pose(k, _support_pose(fig3, "limb_11", 0.25))
    with pytest.raises(SizeOverflow) as exc_info:
        store.query("limb_11", "distal_11", LEFT_HIGH, 2)
    assert exc_info.value.kmax == 1


def test_query_invalid_size(store):
    with pytest.raises(InvalidSizeCount):
        store.query("limb_11", "distal_11", LEFT_HIGH, 0)


def test_kmax_of_and_has_entry(fig3, store):
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    store.append_pose(k, _support_pose(fig3, "limb_11", 0.25))
    assert store.has_entry("distal_11", "limb_11", LEFT_HIGH)
    assert not store.has_entry("distal_11", "limb_11", FORWARD)
    assert store.kmax_of("distal_11", "limb_11", LEFT_HIGH) == 1
    with pytest.raises(NoSuchEntry):
        store.kmax_of("distal_11", "limb_11", FORWARD)


# -- join algebra -------------------------------------------------------------

def test_join_disjoint_supports(fig3):
    a = PartialPose(tuple(_support_pose(fig3, "limb_11", 0.2)))
    b = PartialPose(tuple(_support_pose(fig3, "limb_21", -0.1)))
    joined = join_poses([a, b])
    assert joined.support_indices == a.support_indices | b.support_indices


def test_join_conflict_names_joint(fig3):
    a = PartialPose(tuple(_support_pose(fig3, "limb_21", 0.2)))
    b = PartialPose(tuple(_support_pose(fig3, "limb_22", 0.3)))
    with pytest.raises(JointConflict):
        join_poses([a, b], joint_space=fig3.joint_space)


def test_join_agreeing_overlap_merges(fig3):
    a = PartialPose(tuple(_support_pose(fig3, "limb_21", 0.2)))
    narrower = PartialPose(tuple(
        0.2 if v is not None else None
        for v in _support_pose(fig3, "limb_22", 1.0)
    ))
    joined = join_poses([a, narrower])
    assert joined.values == a.values


def test_join_length_mismatch(fig3):
    a = PartialPose(tuple(_support_pose(fig3, "limb_11", 0.2)))
    b = PartialPose((0.1, None))
    with pytest.raises(SupportMismatch):
        join_poses([a, b])


def test_join_empty_input():
    with pytest.raises(ValueError):
        join_poses([])


@st.composite
def partial_pose_pairs(draw, m=6):
    def one():
        return tuple(
            draw(st.one_of(st.none(), st.floats(-1.0, 1.0, allow_nan=False)))
            for _ in range(m)
        )
    return one(), one()


@settings(max_examples=200, deadline=None)
@given(partial_pose_pairs())
def test_join_commutative_or_conflicts_symmetrically(pair):
    a, b = PartialPose(pair[0]), PartialPose(pair[1])
    try:
        ab = join_poses([a, b])
    except JointConflict:
        with pytest.raises(JointConflict):
            join_poses([b, a])
        return
    assert join_poses([b, a]).values == ab.values


# -- export / import ----------------------------------------------------------

def _small_store(fig3):
    store = EclStore(default_spec(fig3), platform=fig3)
    k = store.insert_entry("distal_11", "limb_11", LEFT_HIGH)
    store.append_pose(k, _support_pose(fig3, "limb_11", 0.25))
    store.append_pose(k, _support_pose(fig3, "limb_11", 0.5))
    k2 = store.insert_entry("distal_21", "limb_22", FORWARD)
    store.append_pose(k2, _support_pose(fig3, "limb_22", -0.375))
    return store


def test_export_import_round_trip(fig3):
    store = _small_store(fig3)
    data = export_store(store)
    again = import_store(data, platform=fig3)
    assert again == store
    assert export_store(again) == data


def test_export_is_canonical_bytes(fig3):
    store = _small_store(fig3)
    data = export_store(store)
    doc = json.loads(data)
    assert doc["version"] == 1
    assert list(doc) == sorted(doc)
    assert data == export_store(import_store(data, platform=fig3))


def test_import_rejects_bad_json():
    with pytest.raises(FormatError):
        import_store(b"not json")


def test_import_rejects_wrong_version(fig3):
    doc = json.loads(export_store(_small_store(fig3)))
    doc["version"] = 99
    with pytest.raises(FormatError):
        import_store(json.dumps(doc))


@pytest.mark.parametrize("mutate,exc", [
    (lambda d: d["vsam"].append(dict(d["vsam"][0])), IntegrityError),
    (lambda d: d["pose"].append(dict(d["pose"][0])), IntegrityError),
    (lambda d: d["pose"][0].update(k_id=999), IntegrityError),
    (lambda d: d["pose"].pop(0), IntegrityError),
    (lambda d: d.pop("vsam"), FormatError),
])
def test_import_integrity_checks(fig3, mutate, exc):
    doc = json.loads(export_store(_small_store(fig3)))
    mutate(doc)
    with pytest.raises(exc):
        import_store(json.dumps(doc))


def test_import_continues_k_id_sequence(fig3):
    store = _small_store(fig3)
    again = import_store(export_store(store), platform=fig3)
    old_ids = {r.k_id for r in store.vsam_rows}
    k3 = again.insert_entry("distal_21", "limb_21", LEFT_HIGH)
    assert k3 > max(old_ids)


def test_store_equality_ignores_insertion_history(fig3):
    a = _small_store(fig3)
    b = import_store(export_store(a), platform=fig3)
    assert a == b
    b.insert_entry("distal_21", "limb_21", LEFT_HIGH)
    assert a != b
