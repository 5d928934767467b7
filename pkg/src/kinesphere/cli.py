"""Command-line entry point.

Subcommands cover the whole workflow: validate a platform file, inspect its
derived labels, build a databank, query or execute spatial commands against
it, round-trip databank files, and run the network service.

stdout carries exactly one JSON document per invocation; human-readable
diagnostics go to stderr.  Exit codes: 0 success, 1 validation or resolution
failure, 2 usage error, 3 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .ecl import EclStore, export_store, import_store
from .errors import (
    FormatError,
    IntegrityError,
    KinesphereError,
    LimitViolation,
    MalformedXml,
    SchemaViolation,
)
from .eurdf import PlatformDescription, parse_eurdf, parse_eurdf_report, subtree
from .kinematics import (
    InstallConfig,
    articulation_pairs,
    auto_install,
    record_install,
)
from .resolver import (
    DEFAULT_DURATION_S,
    DEFAULT_STEPS,
    ResolvedTarget,
    compose,
    interpolate,
    parse_command,
    resolve,
)
from .vsam import build_vsam, laban26

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3

# Errors meaning the input could not even be read as its format, as opposed
# to well-formed input that fails a domain rule.
_FORMAT_ERRORS = (MalformedXml, SchemaViolation, FormatError, IntegrityError)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _info(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _emit_error(args, exc: Exception, line: Optional[int] = None) -> int:
    body = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if line is not None:
        body["error"]["line"] = line
    _emit(body)
    _info(args, f"error: {exc}")
    if isinstance(exc, _FORMAT_ERRORS + (OSError, json.JSONDecodeError)):
        return EXIT_IO
    return EXIT_FAILURE


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_platform(path: str) -> PlatformDescription:
    return parse_eurdf(_read_text(path))


def _load_store(path: str, platform: PlatformDescription) -> EclStore:
    with open(path, "rb") as fh:
        return import_store(fh.read(), platform=platform)


def _pose_json(platform: PlatformDescription, partial) -> dict:
    jspace = platform.joint_space
    return {
        "joint_ids": [d.joint_id for d in jspace.dims],
        "values": list(partial.values),
        "support": sorted(partial.support_ids(jspace)),
    }


def _translate_json(directive) -> dict:
    return {
        "direction": directive.direction.name,
        "x": directive.magnitude,
        "quantum_m": directive.quantum_m,
    }


def _target_json(platform: PlatformDescription, target: ResolvedTarget) -> dict:
    body = _pose_json(platform, target.articulation)
    if target.translation is not None:
        body["translate"] = _translate_json(target.translation)
    return body


# --- subcommands -------------------------------------------------------------


def cmd_validate(args) -> int:
    platform, issues = parse_eurdf_report(_read_text(args.eurdf))
    _emit({
        "v": 1,
        "platform": platform.name,
        "issues": [
            {"code": i.code, "subject": i.subject, "message": i.message}
            for i in issues
        ],
    })
    _info(args, f"{platform.name}: {len(issues)} issue(s)")
    return EXIT_OK if not issues else EXIT_FAILURE


def cmd_derive_labels(args) -> int:
    platform = _load_platform(args.eurdf)
    labels = platform.labels
    _emit({
        "v": 1,
        "platform": platform.name,
        "core": {k: list(v) for k, v in labels.core.items()},
        "limbs": {k: sorted(subtree(platform, k).links) for k in labels.limbs},
        "joints": dict(labels.distals),
        "dof": platform.joint_space.m,
    })
    return EXIT_OK


def _default_origins(platform: PlatformDescription) -> list[str]:
    origins = sorted(platform.labels.distals)
    if platform.mobile:
        origins += sorted(platform.labels.core)
    return origins


def cmd_install(args) -> int:
    platform = _load_platform(args.eurdf)
    origins = args.origin or _default_origins(platform)
    spec = build_vsam(origins, laban26(), args.sizes, platform=platform)
    if args.record:
        store = record_install(platform, spec, args.record)
    else:
        config = InstallConfig(
            restarts=args.restarts, iterations=args.iterations, seed=args.seed
        )
        store = auto_install(platform, spec, config)

    data = export_store(store)
    with open(args.out, "wb") as fh:
        fh.write(data)

    stored: dict[tuple[str, str], int] = {}
    core_rows = 0
    for row in store.vsam_rows:
        if row.origin == row.limb:
            core_rows += 1
        else:
            stored[(row.origin, row.limb)] = stored.get((row.origin, row.limb), 0) + 1
    candidates = articulation_pairs(platform, origins)
    skipped = [pair for pair in candidates if pair not in stored]
    _emit({
        "v": 1,
        "platform": platform.name,
        "out": args.out,
        "pairs": [
            {"origin": o, "limb": l, "directions": n}
            for (o, l), n in sorted(stored.items())
        ],
        "pairs_stored": len(stored),
        "pairs_skipped": [{"origin": o, "limb": l} for o, l in skipped],
        "core_rows": core_rows,
        "poses": len(store.pose_rows),
    })
    _info(args, f"{platform.name}: {len(store.pose_rows)} poses -> {args.out}")
    return EXIT_OK


def cmd_query(args) -> int:
    platform = _load_platform(args.eurdf)
    store = _load_store(args.ecl, platform)
    parsed = parse_command(args.command)
    neutral = platform.neutral_pose()
    if isinstance(parsed, tuple):
        target = compose(store, platform, parsed, neutral)
    else:
        target = resolve(store, platform, parsed, neutral)
    body = {"v": 1, "platform": platform.name}
    body.update(_target_json(platform, target))
    _emit(body)
    return EXIT_OK


def _iter_command_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        yield lineno, body.strip()


def _start_pose(platform: PlatformDescription, spec: str) -> tuple:
    if spec == "neutral":
        return platform.neutral_pose()
    values = json.loads(_read_text(spec))
    if not isinstance(values, list):
        raise FormatError(f"start pose file {spec!r} must hold a JSON array")
    jspace = platform.joint_space
    if len(values) != jspace.m:
        raise FormatError(
            f"start pose has {len(values)} values, platform has {jspace.m} joints"
        )
    pose = tuple(float(v) for v in values)
    for dim, v in zip(jspace.dims, pose):
        if not (dim.limit_min <= v <= dim.limit_max):
            raise LimitViolation(
                f"start pose joint {dim.joint_id!r}: {v} outside "
                f"[{dim.limit_min}, {dim.limit_max}]"
            )
    return pose


def cmd_exec(args) -> int:
    platform = _load_platform(args.eurdf)
    store = _load_store(args.ecl, platform)
    script = _read_text(args.commands)
    current = _start_pose(platform, args.start)

    steps_out: list[dict] = []
    commands_out: list[dict] = []
    base = (0.0, 0.0, 0.0)
    t_offset = 0.0
    for lineno, text in _iter_command_lines(script):
        try:
            parsed = parse_command(text, line=lineno)
            if isinstance(parsed, tuple):
                target = compose(store, platform, parsed, current)
            else:
                target = resolve(store, platform, parsed, current)
            traj = interpolate(platform, current, target,
                               steps=args.steps, duration=args.duration)
        except KinesphereError as e:
            return _emit_error(args, e, line=lineno)
        first = len(steps_out)
        for step in traj.steps:
            steps_out.append({
                "t": t_offset + step.t,
                "pose": list(step.pose),
                "base": [base[i] + step.base_offset[i] for i in range(3)],
            })
        last_offset = traj.steps[-1].base_offset
        base = tuple(base[i] + last_offset[i] for i in range(3))
        current = traj.goal
        t_offset += traj.duration
        commands_out.append({
            "line": lineno,
            "text": text,
            "first_step": first,
            "last_step": len(steps_out) - 1,
        })

    body = {
        "v": 1,
        "platform": platform.name,
        "joint_ids": [d.joint_id for d in platform.joint_space.dims],
        "duration": t_offset,
        "commands": commands_out,
        "steps": steps_out,
    }
    text_out = json.dumps(body, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text_out + "\n")
        _emit({"v": 1, "out": args.out, "commands": len(commands_out),
               "steps": len(steps_out)})
    else:
        print(text_out)
    return EXIT_OK


def cmd_export(args) -> int:
    with open(args.ecl, "rb") as fh:
        store = import_store(fh.read())
    data = export_store(store)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
        _emit({"v": 1, "out": args.out, "bytes": len(data)})
    else:
        sys.stdout.write(data.decode("ascii"))
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_import(args) -> int:
    with open(args.infile, "rb") as fh:
        store = import_store(fh.read())
    data = export_store(store)
    with open(args.out, "wb") as fh:
        fh.write(data)
    _emit({
        "v": 1,
        "out": args.out,
        "platform": store.platform_name,
        "entries": len(store.vsam_rows),
        "poses": len(store.pose_rows),
    })
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app, load_platforms

    platforms = load_platforms([tuple(spec) for spec in args.platform])
    config = ServiceConfig(tick_hz=args.tick_hz, steps=args.steps,
                           duration_s=args.duration)
    app = create_app(platforms, config)
    _info(args, f"serving {sorted(platforms)} on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinesphere",
        description="Body-part level spatial command toolkit.",
    )
    parser.add_argument("--format", choices=["json"], default="json",
                        help="output format (json only)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress stderr diagnostics")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", help="check a platform file")
    p.add_argument("eurdf")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("derive-labels", help="print the derived body-part labels")
    p.add_argument("eurdf")
    p.set_defaults(func=cmd_derive_labels)

    p = sub.add_parser("install", help="build a databank for a platform")
    p.add_argument("eurdf")
    p.add_argument("out", help="databank file to write")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--auto", action="store_true", default=True,
                       help="optimize poses automatically (default)")
    group.add_argument("--record", metavar="FILE",
                       help="build from a recorded-poses JSON file instead")
    p.add_argument("--sizes", type=int, default=3, metavar="N",
                   help="number of reach sizes (default 3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--origin", action="append", metavar="LABEL",
                   help="restrict to this origin (repeatable)")
    p.add_argument("--restarts", type=int, default=InstallConfig.restarts)
    p.add_argument("--iterations", type=int, default=InstallConfig.iterations)
    p.set_defaults(func=cmd_install)

    p = sub.add_parser("query", help="look up one spatial command")
    p.add_argument("eurdf")
    p.add_argument("ecl")
    p.add_argument("command", help='e.g. "limb_11 @ distal_11 -> left-high * 2"')
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("exec", help="run a command script into a trajectory")
    p.add_argument("eurdf")
    p.add_argument("ecl")
    p.add_argument("commands", help="script file, one command per line")
    p.add_argument("--start", default="neutral",
                   help='"neutral" or a JSON pose file (default neutral)')
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--duration", type=float, default=DEFAULT_DURATION_S,
                   help="seconds per command (default 2.0)")
    p.add_argument("--out", help="write the trajectory here instead of stdout")
    p.set_defaults(func=cmd_exec)

    p = sub.add_parser("export", help="re-emit a databank in canonical form")
    p.add_argument("ecl")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="validate a databank file and normalize it")
    p.add_argument("infile")
    p.add_argument("out")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--platform", nargs=3, action="append", required=True,
                   metavar=("NAME", "EURDF", "ECL"),
                   help="platform to expose (repeatable)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--tick-hz", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--duration", type=float, default=DEFAULT_DURATION_S)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (KinesphereError, OSError, json.JSONDecodeError) as e:
        return _emit_error(args, e)


if __name__ == "__main__":
    sys.exit(main())
