"""WebSocket front end for the room logic.

Every message is handled synchronously on one event loop: parse,
mutate the room, enqueue the broadcasts, with no await in between.
Each connection drains its own FIFO queue through a writer task, so
every member observes room events in the server's single arrival
order; seq gaps and reorderings cannot happen.

Messages are JSON objects with a "type" field:

  client -> server: join {room, name}, state_update {update},
                    pointer {origin, direction},
                    scan_batch {batch_seq, points}, leave, heartbeat
  server -> client: welcome {user_id, color, state, roster},
                    roster {users}, state {state},
                    pointer {user_id, origin, direction},
                    scan_batch {publisher, batch_seq, points},
                    heartbeat, error {code, message}
"""

import asyncio
import json
import logging
import time

from websockets.asyncio.server import serve as _ws_serve
from websockets.exceptions import ConnectionClosed

from ..errors import (
    InvalidField,
    InvalidName,
    NotAMember,
    OutOfOrderBatch,
    RoomFull,
)
from .rooms import DEFAULT_MAX_USERS, DEFAULT_SCAN_BUFFER_POINTS, RoomManager

log = logging.getLogger(__name__)

_ERROR_CODES = {
    RoomFull: "room_full",
    NotAMember: "not_a_member",
    InvalidField: "invalid_field",
    InvalidName: "invalid_field",
    OutOfOrderBatch: "out_of_order_batch",
}
_ROOM_ERRORS = tuple(_ERROR_CODES)

HEARTBEAT_INTERVAL = 5.0
HEARTBEAT_TIMEOUT = 15.0


def _vec3(value):
    if (isinstance(value, (list, tuple)) and len(value) == 3
            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in value)):
        return [float(v) for v in value]
    return None


def _scan_message(batch):
    return {"type": "scan_batch", "publisher": batch.publisher,
            "batch_seq": batch.batch_seq, "points": batch.points}


class _Conn:
    __slots__ = ("ws", "queue", "writer", "room_id", "user", "last_seen")

    def __init__(self, ws):
        self.ws = ws
        self.queue = asyncio.Queue()
        self.writer = None
        self.room_id = None
        self.user = None
        self.last_seen = time.monotonic()


class RoomServer:
    """Serves rooms over WebSocket on a single event loop."""

    def __init__(self, max_users=DEFAULT_MAX_USERS,
                 scan_buffer_points=DEFAULT_SCAN_BUFFER_POINTS,
                 heartbeat_interval=HEARTBEAT_INTERVAL,
                 heartbeat_timeout=HEARTBEAT_TIMEOUT):
        self.manager = RoomManager(max_users=max_users,
                                   scan_buffer_points=scan_buffer_points)
        self.heartbeat_interval = float(heartbeat_interval)
        self.heartbeat_timeout = float(heartbeat_timeout)
        self._conns = {}
        self._members = {}
        self._server = None
        self._sweeper = None

    async def start(self, host="127.0.0.1", port=0):
        self._server = await _ws_serve(self._handler, host, port)
        self._sweeper = asyncio.create_task(self._sweep_idle())
        return self

    @property
    def port(self):
        return self._server.sockets[0].getsockname()[1]

    async def stop(self):
        if self._sweeper is not None:
            self._sweeper.cancel()
            try:
                await self._sweeper
            except asyncio.CancelledError:
                pass
            self._sweeper = None
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def _handler(self, ws):
        conn = _Conn(ws)
        conn.writer = asyncio.create_task(self._drain(conn))
        self._conns[ws] = conn
        try:
            async for raw in ws:
                conn.last_seen = time.monotonic()
                self._dispatch(conn, raw)
        except ConnectionClosed:
            pass
        finally:
            self._cleanup(conn)

    async def _drain(self, conn):
        try:
            while True:
                data = await conn.queue.get()
                await conn.ws.send(data)
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    async def _sweep_idle(self):
        while True:
            await asyncio.sleep(self.heartbeat_interval)
            now = time.monotonic()
            stale = [c for c in self._conns.values()
                     if now - c.last_seen > self.heartbeat_timeout]
            if stale:
                await asyncio.gather(
                    *(c.ws.close(1001, "heartbeat timeout") for c in stale),
                    return_exceptions=True)

    # ------------------------------------------------------------ dispatch

    def _dispatch(self, conn, raw):
        try:
            msg = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            self._error(conn, "malformed", "message is not valid JSON")
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            self._error(conn, "malformed", "message needs a type field")
            return
        handler = self._HANDLERS.get(msg["type"])
        if handler is None:
            self._error(conn, "malformed",
                        "unknown message type %r" % msg["type"])
            return
        try:
            handler(self, conn, msg)
        except _ROOM_ERRORS as exc:
            self._error(conn, _ERROR_CODES[type(exc)], str(exc))

    def _on_join(self, conn, msg):
        if conn.user is not None:
            self._error(conn, "malformed", "already joined a room")
            return
        room_id = msg.get("room")
        name = msg.get("name")
        if not isinstance(room_id, str) or not room_id:
            self._error(conn, "malformed", "join needs a room id")
            return
        if not isinstance(name, str):
            self._error(conn, "malformed", "join needs a name")
            return
        room = self.manager.get_or_create(room_id)
        try:
            user = room.join(name)
        except _ROOM_ERRORS:
            self.manager.drop_if_empty(room_id)
            raise
        conn.room_id = room_id
        conn.user = user
        self._members[(room_id, user.user_id)] = conn
        # the joiner sees its welcome, then the buffered scan batches,
        # and only then anything live
        self._send(conn, {
            "type": "welcome",
            "room": room_id,
            "user_id": user.user_id,
            "color": list(user.color),
            "state": room.state.to_dict(),
            "roster": [u.to_dict() for u in room.roster()],
        })
        for batch in room.scan_buffer:
            self._send(conn, _scan_message(batch))
        self._broadcast(room, {
            "type": "roster",
            "users": [u.to_dict() for u in room.roster()],
        })

    def _on_state_update(self, conn, msg):
        room, user = self._require_member(conn)
        update = msg.get("update")
        if not isinstance(update, dict):
            self._error(conn, "malformed",
                        "state_update needs an update object")
            return
        state = room.apply_update(user.user_id, update)
        self._broadcast(room, {"type": "state", "state": state.to_dict()})

    def _on_pointer(self, conn, msg):
        room, user = self._require_member(conn)
        origin = _vec3(msg.get("origin"))
        direction = _vec3(msg.get("direction"))
        if origin is None or direction is None:
            self._error(conn, "malformed",
                        "pointer needs origin and direction 3-vectors")
            return
        room.set_pointer(user.user_id, origin, direction)
        self._broadcast(room, {
            "type": "pointer", "user_id": user.user_id,
            "origin": origin, "direction": direction,
        }, exclude=user.user_id)

    def _on_scan_batch(self, conn, msg):
        room, user = self._require_member(conn)
        batch_seq = msg.get("batch_seq")
        points = msg.get("points")
        if isinstance(batch_seq, bool) or not isinstance(batch_seq, int):
            self._error(conn, "malformed", "scan_batch needs an integer "
                                           "batch_seq")
            return
        if not isinstance(points, list) \
                or any(_vec3(p) is None for p in points):
            self._error(conn, "malformed", "scan_batch points must be "
                                           "3-vectors")
            return
        batch = room.add_scan_batch(user.user_id, batch_seq,
                                    [_vec3(p) for p in points])
        self._broadcast(room, _scan_message(batch), exclude=user.user_id)

    def _on_leave(self, conn, msg):
        self._require_member(conn)
        self._leave_room(conn)

    def _on_heartbeat(self, conn, msg):
        self._send(conn, {"type": "heartbeat"})

    _HANDLERS = {
        "join": _on_join,
        "state_update": _on_state_update,
        "pointer": _on_pointer,
        "scan_batch": _on_scan_batch,
        "leave": _on_leave,
        "heartbeat": _on_heartbeat,
    }

    # ------------------------------------------------------------ plumbing

    def _require_member(self, conn):
        if conn.user is None:
            raise NotAMember("join a room first")
        return self.manager.rooms[conn.room_id], conn.user

    def _leave_room(self, conn):
        room = self.manager.rooms.get(conn.room_id)
        if room is None or conn.user is None:
            return
        room.leave(conn.user.user_id)
        self._members.pop((conn.room_id, conn.user.user_id), None)
        conn.user = None
        room_id, conn.room_id = conn.room_id, None
        if room.empty:
            self.manager.drop_if_empty(room_id)
        else:
            self._broadcast(room, {
                "type": "roster",
                "users": [u.to_dict() for u in room.roster()],
            })

    def _cleanup(self, conn):
        if conn.user is not None:
            self._leave_room(conn)
        self._conns.pop(conn.ws, None)
        if conn.writer is not None:
            conn.writer.cancel()

    def _send(self, conn, payload):
        conn.queue.put_nowait(json.dumps(payload))

    def _broadcast(self, room, payload, exclude=None):
        data = json.dumps(payload)
        for user_id in sorted(room.users):
            if user_id == exclude:
                continue
            conn = self._members.get((room.room_id, user_id))
            if conn is not None:
                conn.queue.put_nowait(data)

    def _error(self, conn, code, message):
        log.debug("error to %s: %s %s", conn.ws.remote_address, code, message)
        self._send(conn, {"type": "error", "code": code, "message": message})


async def run_server(host, port, max_users=DEFAULT_MAX_USERS,
                     scan_buffer_points=DEFAULT_SCAN_BUFFER_POINTS,
                     heartbeat_interval=HEARTBEAT_INTERVAL,
                     heartbeat_timeout=HEARTBEAT_TIMEOUT,
                     ready=None):
    """Serve rooms until cancelled. ready, if given, is called with the
    bound port once the socket is listening."""
    server = RoomServer(max_users=max_users,
                        scan_buffer_points=scan_buffer_points,
                        heartbeat_interval=heartbeat_interval,
                        heartbeat_timeout=heartbeat_timeout)
    await server.start(host, port)
    if ready is not None:
        ready(server.port)
    try:
        await asyncio.Future()
    except asyncio.CancelledError:
        pass
    finally:
        await server.stop()
