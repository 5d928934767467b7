"""Snapshot the live service for the browser console's test fixtures.

Spins the real HTTP/WebSocket app on freshly installed Baxter and youBot
databanks and captures what the console consumes: the platform catalog,
formatter-authoritative command text, and full stream message sequences for
a scripted reach and a base translation.  The frontend tests then run
against real service output without any cross-language plumbing.

Writes frontend/test/fixtures/*.json.  Rerun when the service contract or
the bundled platforms change.
"""

import json
import pathlib
import time

from fastapi.testclient import TestClient

from kinesphere.eurdf import parse_eurdf
from kinesphere.kinematics import InstallConfig, _tip_link, auto_install
from kinesphere.resolver import CommandQuery, format_command
from kinesphere.service import ServiceConfig, create_app
from kinesphere.vsam import build_vsam, laban26, parse_direction

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "src" / "kinesphere" / "fixtures"
OUT = ROOT / "frontend" / "test" / "fixtures"

COMMAND_TUPLES = [
    ("limb_11", "distal_11", "left-high", 3),
    ("limb_13", "distal_13", "left-forward-high", 1),
    ("limb_21", "distal_21", "right-low", 2),
    ("limb_11", "distal_12", "forward-middle", 1),
    ("limb_11", "distal_11", "left-high", 7),
    ("c_1", "c_1", "left-middle", 2),
    ("limb_11", "distal_11", "place-middle", 1),
]


def _install(name):
    platform = parse_eurdf((FIXTURES / f"{name}.eurdf").read_text())
    origins = sorted(platform.labels.distals)
    if platform.mobile:
        origins += sorted(platform.labels.core)
    spec = build_vsam(origins, laban26(), 3, platform=platform)
    return platform, auto_install(platform, spec, InstallConfig())


def _collect_stream(client, platform_name, command, goal_checker):
    sid = client.post("/sessions", json={"platform": platform_name}
                      ).json()["session_id"]
    messages = []
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        messages.append(ws.receive_json())
        submit = client.post(f"/sessions/{sid}/commands",
                             json={"text": command}).json()
        assert submit["accepted"], submit
        deadline = time.monotonic() + 30.0
        settled = 0
        while settled < 3:
            assert time.monotonic() < deadline
            message = ws.receive_json()
            messages.append(message)
            if goal_checker(message, submit["resolution"]):
                settled += 1
    return sid, submit, messages


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    baxter, baxter_store = _install("baxter")
    youbot, youbot_store = _install("youbot")
    bundle = {"baxter": (baxter, baxter_store),
              "youbot": (youbot, youbot_store)}
    config = ServiceConfig(tick_hz=50.0, steps=8, duration_s=0.4)

    with TestClient(create_app(bundle, config)) as client:
        catalog = client.get("/platforms").json()
        (OUT / "catalog.json").write_text(json.dumps(catalog, indent=1))

        commands = []
        for limb, origin, dname, size in COMMAND_TUPLES:
            cmd = CommandQuery(limb, origin, parse_direction(dname), size)
            commands.append({
                "limb": limb, "origin": origin, "direction": dname,
                "size": size, "text": format_command(cmd),
            })
        (OUT / "commands.json").write_text(json.dumps(commands, indent=1))

        reach_text = "limb_11 @ distal_11 -> left-high * 3"
        _, submit, messages = _collect_stream(
            client, "baxter", reach_text,
            lambda msg, res: msg["pose"] == res["goal"],
        )
        doc = {
            "platform": "baxter",
            "command": reach_text,
            "endpoint_link": _tip_link(baxter, "limb_11"),
            "resolution": submit["resolution"],
            "messages": messages,
        }
        (OUT / "stream_left_high.json").write_text(json.dumps(doc, indent=1))

        translate_text = "c_1 @ c_1 -> left-middle * 2"
        _, submit, messages = _collect_stream(
            client, "youbot", translate_text,
            lambda msg, res: (
                msg["base"][0] == res["translate"]["x"]
                * res["translate"]["quantum_m"]
            ),
        )
        doc = {
            "platform": "youbot",
            "command": translate_text,
            "resolution": submit["resolution"],
            "messages": messages,
        }
        (OUT / "stream_translate.json").write_text(json.dumps(doc, indent=1))

    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
