import json

import pytest

from kinesphere.cli import main
from kinesphere.ecl import import_store
from kinesphere.eurdf import subtree
from kinesphere.vsam import parse_direction

from .conftest import FIXTURES, load_platform

BROKEN_NESTING = """\
<robot name="broken">
  <link name="base"><body_part>c_1</body_part></link>
  <link name="mid"><body_part>limb_11</body_part></link>
  <link name="end"><body_part>limb_12</body_part></link>
  <joint name="j1" type="revolute">
    <parent link="base"/><child link="mid"/>
    <origin xyz="0 0 0.1"/><axis xyz="0 1 0"/>
    <limit lower="-1" upper="1"/>
    <body_part>distal_12</body_part>
  </joint>
  <joint name="j2" type="revolute">
    <parent link="mid"/><child link="end"/>
    <origin xyz="0 0 0.1"/><axis xyz="0 1 0"/>
    <limit lower="-1" upper="1"/>
    <body_part>distal_11</body_part>
  </joint>
</robot>
"""


def _run(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    body = json.loads(captured.out) if captured.out.strip() else None
    return rc, body, captured.err


# -- validate -----------------------------------------------------------------

def test_validate_clean_fixture(capsys):
    rc, body, err = _run(capsys, ["validate", str(FIXTURES / "fig3_example.eurdf")])
    assert rc == 0
    assert body == {"v": 1, "platform": "fig3_example", "issues": []}
    assert "issue" in err


def test_validate_reports_issues(capsys, tmp_path):
    doc = tmp_path / "broken.eurdf"
    doc.write_text(BROKEN_NESTING)
    rc, body, _ = _run(capsys, ["validate", str(doc)])
    assert rc == 1
    assert body["issues"]
    for issue in body["issues"]:
        assert set(issue) == {"code", "subject", "message"}
    assert "PAIRING_VIOLATION" in {i["code"] for i in body["issues"]}


def test_validate_malformed_xml(capsys, tmp_path):
    doc = tmp_path / "bad.eurdf"
    doc.write_text("<robot name='x'><link")
    rc, body, _ = _run(capsys, ["validate", str(doc)])
    assert rc == 3
    assert body["error"]["type"] == "MalformedXml"


def test_missing_file_exits_io(capsys, tmp_path):
    rc, body, _ = _run(capsys, ["validate", str(tmp_path / "nope.eurdf")])
    assert rc == 3
    assert body["error"]["type"] in {"FileNotFoundError", "OSError"}


def test_quiet_silences_diagnostics(capsys):
    rc, _, err = _run(
        capsys, ["--quiet", "validate", str(FIXTURES / "fig3_example.eurdf")]
    )
    assert rc == 0
    assert err == ""


# -- derive-labels ------------------------------------------------------------

def test_derive_labels_output(capsys):
    rc, body, _ = _run(
        capsys, ["derive-labels", str(FIXTURES / "fig3_example.eurdf")]
    )
    assert rc == 0
    assert set(body["core"]) == {"c_1", "c_2"}
    assert set(body["limbs"]) == {"limb_11", "limb_21", "limb_22", "limb_23"}
    assert body["joints"]["distal_11"] == "arm_a_shoulder"
    assert body["dof"] == 5
    platform = load_platform("fig3_example")
    assert body["limbs"]["limb_23"] == sorted(subtree(platform, "limb_23").links)


# -- usage errors -------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["validate"],
    ["install", "a.eurdf", "a.ecl", "--auto",
     "--record", "poses.json"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as ei:
        main(argv)
    assert ei.value.code == 2


# -- install ------------------------------------------------------------------

def test_install_auto_core_only(capsys, tmp_path):
    out = tmp_path / "khepera.ecl"
    rc, body, _ = _run(capsys, [
        "install", str(FIXTURES / "khepera.eurdf"), str(out),
    ])
    assert rc == 0
    assert out.exists()
    assert body["core_rows"] == 8
    assert body["poses"] == 0
    assert body["pairs"] == []


def test_install_auto_articulated(capsys, tmp_path):
    out = tmp_path / "fig3.ecl"
    rc, body, _ = _run(capsys, [
        "install", str(FIXTURES / "fig3_example.eurdf"), str(out),
        "--restarts", "2", "--iterations", "15", "--seed", "9",
    ])
    assert rc == 0
    assert body["pairs_stored"] > 0
    assert body["poses"] > 0
    assert body["core_rows"] == 0
    platform = load_platform("fig3_example")
    store = import_store(out.read_bytes(), platform=platform)
    assert len(store.pose_rows) == body["poses"]


def test_install_same_seed_is_byte_identical(capsys, tmp_path):
    args = ["install", str(FIXTURES / "fig3_example.eurdf"), None,
            "--restarts", "2", "--iterations", "15", "--seed", "4"]
    outs = []
    for name in ("a.ecl", "b.ecl"):
        path = tmp_path / name
        args[2] = str(path)
        rc, _, _ = _run(capsys, args)
        assert rc == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_install_origin_restriction(capsys, tmp_path):
    out = tmp_path / "narrow.ecl"
    rc, body, _ = _run(capsys, [
        "install", str(FIXTURES / "fig3_example.eurdf"), str(out),
        "--origin", "distal_11", "--restarts", "2", "--iterations", "15",
    ])
    assert rc == 0
    assert {p["origin"] for p in body["pairs"]} == {"distal_11"}


def test_install_record(capsys, tmp_path):
    platform = load_platform("fig3_example")
    jspace = platform.joint_space
    idx = {jspace.index_of[j] for j in subtree(platform, "limb_11").joints}
    pose = [0.3 if i in idx else None for i in range(jspace.m)]
    recorded = tmp_path / "poses.json"
    recorded.write_text(json.dumps([{
        "origin": "distal_11", "limb": "limb_11",
        "direction": "left-high", "poses": [pose],
    }]))
    out = tmp_path / "rec.ecl"
    rc, body, _ = _run(capsys, [
        "install", str(FIXTURES / "fig3_example.eurdf"), str(out),
        "--record", str(recorded),
    ])
    assert rc == 0
    assert body["poses"] == 1
    assert body["pairs"] == [
        {"origin": "distal_11", "limb": "limb_11", "directions": 1}
    ]


def test_install_unknown_origin_fails(capsys, tmp_path):
    rc, body, _ = _run(capsys, [
        "install", str(FIXTURES / "fig3_example.eurdf"),
        str(tmp_path / "x.ecl"), "--origin", "distal_99",
    ])
    assert rc == 1
    assert body["error"]["type"] == "UnknownOrigin"


# -- query --------------------------------------------------------------------

def test_query_stored_entry(capsys, eurdf_paths, ecl_files):
    rc, body, _ = _run(capsys, [
        "query", str(eurdf_paths["youbot"]), str(ecl_files["youbot"]),
        "limb_11 @ distal_11 -> left-high * 1",
    ])
    assert rc == 0
    assert body["platform"] == "youbot"
    assert len(body["values"]) == len(body["joint_ids"])
    assert body["support"]
    assert "translate" not in body


def test_query_overflow_reports_translation(capsys, eurdf_paths, ecl_files,
                                            installed):
    kmax = installed["youbot"].kmax_of(
        "distal_11", "limb_11", parse_direction("left-high")
    )
    rc, body, _ = _run(capsys, [
        "query", str(eurdf_paths["youbot"]), str(ecl_files["youbot"]),
        f"limb_11 @ distal_11 -> left-high * {kmax + 2}",
    ])
    assert rc == 0
    assert body["translate"]["x"] == 2
    assert body["translate"]["direction"] == "left-middle"
    assert body["translate"]["quantum_m"] > 0.0


def test_query_compound_place_middle(capsys, eurdf_paths, ecl_files):
    rc, body, _ = _run(capsys, [
        "query", str(eurdf_paths["fig3_example"]), str(ecl_files["fig3_example"]),
        "limb_11 @ distal_11 -> place-middle * 1"
        " & limb_22 @ distal_22 -> place-middle * 1",
    ])
    assert rc == 0
    assert "arm_a_shoulder" in body["support"]
    assert "arm_b_elbow" in body["support"]


def test_query_absent_pair(capsys, eurdf_paths, ecl_files):
    rc, body, _ = _run(capsys, [
        "query", str(eurdf_paths["youbot"]), str(ecl_files["youbot"]),
        "limb_11 @ distal_13 -> left-high * 1",
    ])
    assert rc == 1
    assert body["error"]["type"] == "NoSuchEntry"


def test_query_syntax_error(capsys, eurdf_paths, ecl_files):
    rc, body, _ = _run(capsys, [
        "query", str(eurdf_paths["youbot"]), str(ecl_files["youbot"]),
        "limb_11 -> left-high",
    ])
    assert rc == 1
    assert body["error"]["type"] == "CommandSyntaxError"


# -- exec ---------------------------------------------------------------------

def _script(tmp_path, text):
    path = tmp_path / "script.txt"
    path.write_text(text)
    return path


def test_exec_trajectory_shape(capsys, tmp_path, eurdf_paths, ecl_files):
    script = _script(tmp_path, (
        "limb_11 @ distal_11 -> left-high * 1\n"
        "# settle\n"
        "limb_11 @ distal_11 -> place-middle * 1\n"
    ))
    rc, body, _ = _run(capsys, [
        "exec", str(eurdf_paths["youbot"]), str(ecl_files["youbot"]),
        str(script), "--steps", "5", "--duration", "0.5",
    ])
    assert rc == 0
    assert body["duration"] == pytest.approx(1.0)
    assert [c["line"] for c in body["commands"]] == [1, 3]
    assert len(body["steps"]) == 10
    assert body["steps"][0]["t"] == 0.0
    assert body["steps"][-1]["t"] == pytest.approx(1.0)
    first = body["commands"][0]
    second = body["commands"][1]
    assert first["last_step"] == 4
    assert second["first_step"] == 5
    # second command starts from the first command's goal
    assert body["steps"][5]["pose"] == body["steps"][4]["pose"]


def test_exec_failing_line_reported(capsys, tmp_path, eurdf_paths, ecl_files):
    script = _script(tmp_path, (
        "limb_11 @ distal_11 -> place-middle * 1\n"
        "\n"
        "limb_11 @ distal_13 -> left-high * 1\n"
    ))
    rc, body, _ = _run(capsys, [
        "exec", str(eurdf_paths["youbot"]), str(ecl_files["youbot"]),
        str(script), "--steps", "3", "--duration", "0.1",
    ])
    assert rc == 1
    assert body["error"]["type"] == "NoSuchEntry"
    assert body["error"]["line"] == 3


def test_exec_out_file(capsys, tmp_path, eurdf_paths, ecl_files):
    script = _script(tmp_path, "limb_11 @ distal_11 -> left-high * 1\n")
    out = tmp_path / "traj.json"
    rc, body, _ = _run(capsys, [
        "exec", str(eurdf_paths["youbot"]), str(ecl_files["youbot"]),
        str(script), "--steps", "3", "--duration", "0.1", "--out", str(out),
    ])
    assert rc == 0
    assert body == {"v": 1, "out": str(out), "commands": 1, "steps": 3}
    doc = json.loads(out.read_text())
    assert doc["platform"] == "youbot"


def test_exec_bad_start_pose(capsys, tmp_path, eurdf_paths, ecl_files):
    start = tmp_path / "start.json"
    start.write_text("[99.0, 0.0, 0.0, 0.0, 0.0]")
    script = _script(tmp_path, "limb_11 @ distal_11 -> left-high * 1\n")
    rc, body, _ = _run(capsys, [
        "exec", str(eurdf_paths["youbot"]), str(ecl_files["youbot"]),
        str(script), "--start", str(start),
    ])
    assert rc == 1
    assert body["error"]["type"] == "LimitViolation"
    assert "line" not in body["error"]


# -- export / import ----------------------------------------------------------

def test_export_is_idempotent(capsys, tmp_path, ecl_files):
    first = tmp_path / "a.ecl"
    second = tmp_path / "b.ecl"
    rc, body, _ = _run(capsys, [
        "export", str(ecl_files["youbot"]), "--out", str(first)
    ])
    assert rc == 0
    assert body["bytes"] == first.stat().st_size
    rc, _, _ = _run(capsys, ["export", str(first), "--out", str(second)])
    assert rc == 0
    assert first.read_bytes() == second.read_bytes()


def test_export_to_stdout(capsys, ecl_files):
    rc, body, _ = _run(capsys, ["export", str(ecl_files["khepera"])])
    assert rc == 0
    assert body["version"] == 1
    assert body["platform"] == "khepera"
    assert body == json.loads(ecl_files["khepera"].read_text())


def test_import_normalizes(capsys, tmp_path, ecl_files):
    out = tmp_path / "norm.ecl"
    rc, body, _ = _run(capsys, [
        "import", str(ecl_files["youbot"]), str(out)
    ])
    assert rc == 0
    assert body["platform"] == "youbot"
    assert out.read_bytes() == ecl_files["youbot"].read_bytes()


def test_import_rejects_garbage(capsys, tmp_path):
    bad = tmp_path / "bad.ecl"
    bad.write_text("{broken")
    rc, body, _ = _run(capsys, ["import", str(bad), str(tmp_path / "o.ecl")])
    assert rc == 3
    assert body["error"]["type"] == "FormatError"


def test_import_rejects_integrity_violation(capsys, tmp_path, ecl_files):
    doc = json.loads(ecl_files["youbot"].read_text())
    doc["pose"].append(dict(doc["pose"][-1]))
    bad = tmp_path / "dup.ecl"
    bad.write_text(json.dumps(doc))
    rc, body, _ = _run(capsys, ["import", str(bad), str(tmp_path / "o.ecl")])
    assert rc == 3
    assert body["error"]["type"] == "IntegrityError"
