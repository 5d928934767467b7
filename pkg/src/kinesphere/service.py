"""Session service for interactive operation over HTTP and WebSocket.

Each session owns a platform pose and a base position, plays accepted
commands back as timed trajectories, and streams its state at a fixed tick.
Commands submitted while a trajectory is in flight queue FIFO; resolution
happens at submission time against the pose the session will hold once the
queue drains, so a sequence of commands lands exactly where the same script
would under the command-line executor.
"""

from __future__ import annotations

import asyncio
import secrets
from collections import deque
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .ecl import EclStore, import_store
from .errors import KinesphereError, UnknownPlatform, UnknownSession
from .eurdf import PlatformDescription, parse_eurdf
from .kinematics import forward_kinematics
from .resolver import (
    DEFAULT_DURATION_S,
    DEFAULT_STEPS,
    CommandQuery,
    Trajectory,
    compose,
    format_command,
    interpolate,
    parse_command,
    resolve,
)

Command = Union[str, CommandQuery, tuple]


@dataclass(frozen=True)
class ServiceConfig:
    tick_hz: float = 20.0
    steps: int = DEFAULT_STEPS
    duration_s: float = DEFAULT_DURATION_S

    def __post_init__(self):
        if self.tick_hz <= 0:
            raise ValueError(f"tick_hz must be positive, got {self.tick_hz}")


class _Playback:
    __slots__ = ("trajectory", "started_at")

    def __init__(self, trajectory: Trajectory, started_at: float):
        self.trajectory = trajectory
        self.started_at = started_at


def _lerp(a: Sequence[float], b: Sequence[float], frac: float) -> tuple:
    return tuple(a[i] + (b[i] - a[i]) * frac for i in range(len(a)))


def _sample(traj: Trajectory, elapsed: float) -> tuple[tuple, tuple]:
    """Pose and base offset at an arbitrary time along the trajectory.

    Steps are uniformly spaced, so the bracketing pair falls out of the
    index arithmetic; both ends sit inside joint limits, hence so does any
    point between them.
    """
    steps = traj.steps
    if elapsed <= 0.0:
        return steps[0].pose, steps[0].base_offset
    if elapsed >= traj.duration:
        return steps[-1].pose, steps[-1].base_offset
    pos = elapsed / traj.duration * (len(steps) - 1)
    i = min(int(pos), len(steps) - 2)
    frac = pos - i
    pose = _lerp(steps[i].pose, steps[i + 1].pose, frac)
    base = _lerp(steps[i].base_offset, steps[i + 1].base_offset, frac)
    return pose, base


class _Session:
    def __init__(self, session_id: str, platform_name: str,
                 platform: PlatformDescription, store: EclStore,
                 created_at: float):
        self.session_id = session_id
        self.platform_name = platform_name
        self.platform = platform
        self.store = store
        self.created_at = created_at
        self.current_pose: tuple = platform.neutral_pose()
        self.base: tuple = (0.0, 0.0, 0.0)
        self.live_offset: tuple = (0.0, 0.0, 0.0)
        # Pose the session will hold once every queued trajectory has
        # played out; new commands resolve against this, not the live pose.
        self.pending_pose: tuple = self.current_pose
        self.queue: deque = deque()
        self.active: Optional[_Playback] = None
        self.history: list[dict] = []
        self.seq = 0
        self.last_message: Optional[dict] = None
        self.subscribers: set = set()
        self.closed = False
        self.task: Optional[asyncio.Task] = None

    @property
    def idle(self) -> bool:
        return self.active is None and not self.queue

    def streamed_base(self) -> tuple:
        return tuple(self.base[i] + self.live_offset[i] for i in range(3))


class SessionManager:
    """Owns sessions and their playback loops.

    Everything here runs on one event loop; session state is never touched
    from another thread, which is the whole concurrency story.
    """

    def __init__(self, platforms: Mapping[str, tuple[PlatformDescription, EclStore]],
                 config: ServiceConfig = ServiceConfig()):
        self._platforms = dict(platforms)
        self.config = config
        self._sessions: dict[str, _Session] = {}

    # -- lookup ---------------------------------------------------------

    def session(self, session_id: str) -> _Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def platform_catalog(self) -> dict:
        platforms = []
        for name in sorted(self._platforms):
            platform, store = self._platforms[name]
            pair_dirs: dict[tuple[str, str], list] = {}
            for row in store.vsam_rows:
                pair_dirs.setdefault((row.origin, row.limb), []).append(row.direction)
            pairs = []
            for (origin, limb) in sorted(pair_dirs):
                directions = sorted(pair_dirs[(origin, limb)])
                pairs.append({
                    "origin": origin,
                    "limb": limb,
                    "directions": [d.name for d in directions],
                    "kmax": {d.name: store.kmax_of(origin, limb, d)
                             for d in directions},
                })
            tree = platform.tree
            links = []
            for link_id in sorted(tree.link_by_id):
                pj = tree.link_by_id[link_id].parent_joint
                parent = tree.joint_by_id[pj].parent_link if pj else None
                links.append({"id": link_id, "parent": parent})
            platforms.append({
                "name": name,
                "core": sorted(platform.labels.core),
                "limbs": sorted(platform.labels.limbs),
                "core_links": sorted(platform.labels.core_links),
                "links": links,
                "joint_ids": [d.joint_id for d in platform.joint_space.dims],
                "neutral": list(platform.neutral_pose()),
                "mobile": platform.mobile,
                "s_max": store.spec.s_max,
                "pairs": pairs,
            })
        return {"v": 1, "platforms": platforms}

    # -- session lifecycle ----------------------------------------------

    def create_session(self, platform_name) -> _Session:
        if platform_name not in self._platforms:
            raise UnknownPlatform(f"no platform {platform_name!r} loaded")
        platform, store = self._platforms[platform_name]
        loop = asyncio.get_running_loop()
        session = _Session(secrets.token_hex(8), platform_name, platform,
                           store, loop.time())
        self._sessions[session.session_id] = session
        self._publish(session)
        session.task = asyncio.create_task(self._run(session))
        return session

    async def shutdown(self):
        tasks = []
        for session in self._sessions.values():
            session.closed = True
            if session.task is not None:
                session.task.cancel()
                tasks.append(session.task)
        if tasks:
            await asyncio.gather(*tasks, return_exceptions=True)
        self._sessions.clear()

    # -- commands -------------------------------------------------------

    def submit(self, session_id: str, command: Command) -> dict:
        session = self.session(session_id)
        try:
            if isinstance(command, str):
                text = command
                parsed = parse_command(text)
            else:
                parsed = command
                text = format_command(parsed)
            start = session.pending_pose
            if isinstance(parsed, tuple):
                target = compose(session.store, session.platform, parsed, start)
            else:
                target = resolve(session.store, session.platform, parsed, start)
            trajectory = interpolate(session.platform, start, target,
                                     steps=self.config.steps,
                                     duration=self.config.duration_s)
        except KinesphereError as e:
            return {
                "v": 1,
                "accepted": False,
                "error": str(e),
                "error_type": type(e).__name__,
            }
        session.queue.append(trajectory)
        session.pending_pose = trajectory.goal
        loop = asyncio.get_running_loop()
        session.history.append({
            "text": text,
            "t": loop.time() - session.created_at,
        })
        jspace = session.platform.joint_space
        resolution = {
            "support": sorted(target.articulation.support_ids(jspace)),
            "goal": list(trajectory.goal),
            "steps": len(trajectory.steps),
            "duration": trajectory.duration,
        }
        if target.translation is not None:
            resolution["translate"] = {
                "direction": target.translation.direction.name,
                "x": target.translation.magnitude,
                "quantum_m": target.translation.quantum_m,
            }
        return {"v": 1, "accepted": True, "resolution": resolution}

    def cancel(self, session_id: str) -> dict:
        """Drop everything queued and freeze at the pose already streamed."""
        session = self.session(session_id)
        session.queue.clear()
        if session.active is not None:
            session.base = session.streamed_base()
            session.live_offset = (0.0, 0.0, 0.0)
            session.active = None
        session.pending_pose = session.current_pose
        return {
            "v": 1,
            "cancelled": True,
            "pose": list(session.current_pose),
            "base": list(session.base),
        }

    def session_state(self, session_id: str) -> dict:
        session = self.session(session_id)
        return {
            "v": 1,
            "session_id": session.session_id,
            "platform": session.platform_name,
            "pose": list(session.current_pose),
            "base": list(session.streamed_base()),
            "idle": session.idle,
            "queue_depth": len(session.queue) + (0 if session.active is None else 1),
            "history": list(session.history),
        }

    # -- playback loop --------------------------------------------------

    async def _run(self, session: _Session):
        period = 1.0 / self.config.tick_hz
        try:
            while not session.closed:
                self._step(session)
                self._publish(session)
                await asyncio.sleep(period)
        except asyncio.CancelledError:
            pass

    def _step(self, session: _Session):
        now = asyncio.get_running_loop().time()
        if session.active is None and session.queue:
            session.active = _Playback(session.queue.popleft(), now)
        if session.active is None:
            return
        trajectory = session.active.trajectory
        elapsed = now - session.active.started_at
        if elapsed >= trajectory.duration:
            last = trajectory.steps[-1]
            session.current_pose = last.pose
            session.base = tuple(
                session.base[i] + last.base_offset[i] for i in range(3)
            )
            session.live_offset = (0.0, 0.0, 0.0)
            session.active = None
        else:
            pose, offset = _sample(trajectory, elapsed)
            session.current_pose = pose
            session.live_offset = offset

    def _publish(self, session: _Session):
        now = asyncio.get_running_loop().time()
        frames = forward_kinematics(session.platform, session.current_pose)
        session.seq += 1
        message = {
            "v": 1,
            "seq": session.seq,
            "t": now - session.created_at,
            "pose": list(session.current_pose),
            "base": list(session.streamed_base()),
            "frames": {
                link_id: [float(x) for x in ft.translation]
                for link_id, ft in frames.items()
            },
        }
        session.last_message = message
        for queue in list(session.subscribers):
            try:
                queue.put_nowait(message)
            except asyncio.QueueFull:
                # Slow reader: shed the oldest message, never block the tick.
                queue.get_nowait()
                queue.put_nowait(message)


def load_platforms(specs: Sequence[tuple[str, str, str]]
                   ) -> dict[str, tuple[PlatformDescription, EclStore]]:
    """Load (name, platform file, databank file) triples for create_app."""
    out = {}
    for name, eurdf_path, ecl_path in specs:
        with open(eurdf_path, "r", encoding="utf-8") as fh:
            platform = parse_eurdf(fh.read())
        with open(ecl_path, "rb") as fh:
            store = import_store(fh.read(), platform=platform)
        out[name] = (platform, store)
    return out


def create_app(platforms: Mapping[str, tuple[PlatformDescription, EclStore]],
               config: ServiceConfig = ServiceConfig()) -> FastAPI:
    manager = SessionManager(platforms, config)

    @asynccontextmanager
    async def lifespan(app):
        yield
        await manager.shutdown()

    app = FastAPI(title="kinesphere session service", lifespan=lifespan)
    app.state.manager = manager

    @app.get("/platforms")
    async def get_platforms():
        return manager.platform_catalog()

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        name = body.get("platform")
        if not isinstance(name, str):
            raise HTTPException(422, "body must carry a platform name")
        try:
            session = manager.create_session(name)
        except UnknownPlatform as e:
            raise HTTPException(404, str(e)) from None
        return {
            "v": 1,
            "session_id": session.session_id,
            "platform": session.platform_name,
            "pose": list(session.current_pose),
            "base": list(session.base),
        }

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        try:
            return manager.session_state(session_id)
        except UnknownSession as e:
            raise HTTPException(404, str(e)) from None

    @app.post("/sessions/{session_id}/commands")
    async def post_command(session_id: str, body: dict):
        text = body.get("text")
        if not isinstance(text, str):
            raise HTTPException(422, "body must carry command text")
        try:
            return manager.submit(session_id, text)
        except UnknownSession as e:
            raise HTTPException(404, str(e)) from None

    @app.post("/sessions/{session_id}/cancel")
    async def post_cancel(session_id: str):
        try:
            return manager.cancel(session_id)
        except UnknownSession as e:
            raise HTTPException(404, str(e)) from None

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        await websocket.accept()
        try:
            session = manager.session(session_id)
        except UnknownSession:
            await websocket.close(code=4404)
            return
        queue: asyncio.Queue = asyncio.Queue(maxsize=256)
        session.subscribers.add(queue)
        try:
            snapshot = session.last_message
            last_seq = 0
            if snapshot is not None:
                await websocket.send_json(snapshot)
                last_seq = snapshot["seq"]
            while True:
                message = await queue.get()
                if message["seq"] <= last_seq:
                    continue
                last_seq = message["seq"]
                await websocket.send_json(message)
        except WebSocketDisconnect:
            pass
        finally:
            session.subscribers.discard(queue)

    return app
