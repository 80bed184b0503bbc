"""Headless session client.

Connects to a room server, mirrors the authoritative state, and keeps
an ordered log of everything it receives so tests and scripted demos
can assert on exact delivery order.
"""

import asyncio
import json

from websockets.asyncio.client import connect as _ws_connect
from websockets.exceptions import ConnectionClosed


class JoinRejected(RuntimeError):
    """Server refused the join; code carries the wire error code."""

    def __init__(self, code, message):
        super().__init__("%s: %s" % (code, message))
        self.code = code


class SessionClient:
    def __init__(self):
        self.user_id = None
        self.color = None
        self.room = None
        self.state = None      # latest authoritative state dict
        self.states = []       # every state broadcast, in delivery order
        self.roster = []
        self.rosters = []
        self.pointers = []
        self.scan_batches = []
        self.errors = []
        self.heartbeats = 0
        self.closed = False
        self._ws = None
        self._reader = None
        self._event = asyncio.Event()

    async def connect(self, uri):
        self._ws = await _ws_connect(uri)
        self._reader = asyncio.create_task(self._read_loop())
        return self

    async def close(self):
        if self._ws is not None:
            await self._ws.close()
        if self._reader is not None:
            await self._reader
            self._reader = None

    async def join(self, room, name, timeout=5.0):
        """Join a room; returns the welcome state dict."""
        n_errors = len(self.errors)
        await self._send({"type": "join", "room": room, "name": name})
        await self.wait_for(
            lambda c: c.user_id is not None or len(c.errors) > n_errors,
            timeout)
        if self.user_id is None:
            err = self.errors[-1]
            raise JoinRejected(err["code"], err.get("message", ""))
        return self.state

    async def send_update(self, update):
        await self._send({"type": "state_update", "update": update})

    async def send_pointer(self, origin, direction):
        await self._send({"type": "pointer", "origin": list(origin),
                          "direction": list(direction)})

    async def send_scan_batch(self, batch_seq, points):
        await self._send({"type": "scan_batch", "batch_seq": batch_seq,
                          "points": [list(p) for p in points]})

    async def send_heartbeat(self):
        await self._send({"type": "heartbeat"})

    async def leave(self):
        await self._send({"type": "leave"})
        self.user_id = None
        self.room = None

    async def wait_for(self, predicate, timeout=5.0):
        """Block until predicate(self) holds, rechecked on every message."""
        loop = asyncio.get_running_loop()
        deadline = loop.time() + timeout
        while True:
            self._event.clear()
            if predicate(self):
                return
            if self.closed:
                raise ConnectionError("connection closed while waiting")
            remaining = deadline - loop.time()
            if remaining <= 0:
                raise TimeoutError("condition not met within %.1f s"
                                   % timeout)
            try:
                await asyncio.wait_for(self._event.wait(), remaining)
            except asyncio.TimeoutError:
                raise TimeoutError("condition not met within %.1f s"
                                   % timeout) from None

    async def wait_for_seq(self, seq, timeout=5.0):
        await self.wait_for(
            lambda c: c.state is not None and c.state["seq"] >= seq, timeout)

    async def _send(self, payload):
        await self._ws.send(json.dumps(payload))

    async def _read_loop(self):
        try:
            async for raw in self._ws:
                self._on_message(json.loads(raw))
        except ConnectionClosed:
            pass
        finally:
            self.closed = True
            self._event.set()

    def _on_message(self, msg):
        mtype = msg.get("type")
        if mtype == "welcome":
            self.user_id = msg["user_id"]
            self.color = tuple(msg["color"])
            self.room = msg["room"]
            self.state = msg["state"]
            self.roster = msg["roster"]
        elif mtype == "state":
            self.state = msg["state"]
            self.states.append(msg["state"])
        elif mtype == "roster":
            self.roster = msg["users"]
            self.rosters.append(msg["users"])
        elif mtype == "pointer":
            self.pointers.append(msg)
        elif mtype == "scan_batch":
            self.scan_batches.append(msg)
        elif mtype == "error":
            self.errors.append(msg)
        elif mtype == "heartbeat":
            self.heartbeats += 1
        self._event.set()
