"""Room bookkeeping for the collaboration server.

Pure data structures and state transitions, no networking. The server
wraps these in a WebSocket front end; tests can drive them directly.
The server side is authoritative: clients send partial updates, the
room merges them in arrival order (last writer wins) and stamps every
accepted update with a strictly increasing seq.
"""

from collections import deque
from dataclasses import dataclass, field

from ..deformation import PlaybackConfig
from ..errors import (
    InvalidField,
    InvalidName,
    NotAMember,
    OutOfOrderBatch,
    RoomFull,
)

DEFAULT_MAX_USERS = 20
DEFAULT_SCAN_BUFFER_POINTS = 500000

# one distinct color per seat at the default room cap
_PALETTE = [
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255),
    (170, 110, 40), (255, 250, 200), (128, 0, 0), (170, 255, 195),
    (128, 128, 0), (255, 215, 180), (0, 0, 128), (128, 128, 128),
]


@dataclass(eq=False)
class SessionState:
    """Shared playback state, merged server-side."""

    seq: int = 0
    playback_time: float = 0.0
    playing: bool = False
    config: PlaybackConfig = field(default_factory=PlaybackConfig)
    active_model: str = "tls_pointcloud"
    tracked_nodes: list = field(default_factory=list)
    duration_s: float = 60.0

    def to_dict(self):
        return {
            "seq": self.seq,
            "playback_time": self.playback_time,
            "playing": self.playing,
            "scale": self.config.scale,
            "speed": self.config.speed,
            "axis_mask": list(self.config.axis_mask),
            "active_model": self.active_model,
            "tracked_nodes": list(self.tracked_nodes),
            "duration_s": self.duration_s,
        }


@dataclass(eq=False)
class UserPresence:
    user_id: int
    name: str
    color: tuple
    pointer: tuple = None  # optional (origin, direction) ray

    def to_dict(self):
        return {
            "user_id": self.user_id,
            "name": self.name,
            "color": list(self.color),
        }


@dataclass(eq=False)
class ScanBatch:
    publisher: int
    batch_seq: int
    points: list  # [x, y, z] triples, meters


_UPDATABLE = (
    "playback_time", "playing", "scale", "speed", "axis_mask",
    "active_model", "tracked_nodes", "duration_s",
)


def _checked_number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidField("%s must be a number" % name)
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        raise InvalidField("%s must be finite" % name)
    return value


def merged_state(state, update):
    """Validated copy of state with a partial update applied.

    The whole update is checked before anything takes effect, so a
    rejected update has no partial effects. seq is left untouched
    here; the room stamps it when it accepts the result.
    """
    if not isinstance(update, dict):
        raise InvalidField("update must be a mapping of state fields")
    for key in update:
        if key not in _UPDATABLE:
            raise InvalidField("unknown state field %r" % key)

    duration = state.duration_s
    if "duration_s" in update:
        duration = _checked_number(update["duration_s"], "duration_s")
        if not duration > 0:
            raise InvalidField("duration_s must be > 0")

    # a shrinking duration clamps the clock rather than invalidating it
    playback_time = min(state.playback_time, duration)
    if "playback_time" in update:
        playback_time = _checked_number(update["playback_time"],
                                        "playback_time")
        if not 0.0 <= playback_time <= duration:
            raise InvalidField(
                "playback_time outside [0, %s]" % duration)

    playing = state.playing
    if "playing" in update:
        playing = update["playing"]
        if not isinstance(playing, bool):
            raise InvalidField("playing must be a flag")

    scale = state.config.scale
    if "scale" in update:
        scale = _checked_number(update["scale"], "scale")
        if not scale >= 0:
            raise InvalidField("scale must be >= 0")

    speed = state.config.speed
    if "speed" in update:
        speed = _checked_number(update["speed"], "speed")
        if not speed > 0:
            raise InvalidField("speed must be > 0")

    axis_mask = state.config.axis_mask
    if "axis_mask" in update:
        raw = update["axis_mask"]
        ok = (isinstance(raw, (list, tuple)) and len(raw) == 3
              and all(isinstance(v, int) and not isinstance(v, bool)
                      and v in (0, 1) for v in raw))
        if not ok:
            raise InvalidField("axis_mask must be three 0/1 flags")
        axis_mask = tuple(int(v) for v in raw)

    active_model = state.active_model
    if "active_model" in update:
        active_model = update["active_model"]
        if not isinstance(active_model, str) or not active_model:
            raise InvalidField("active_model must be a non-empty name")

    tracked = list(state.tracked_nodes)
    if "tracked_nodes" in update:
        raw = update["tracked_nodes"]
        ok = (isinstance(raw, (list, tuple))
              and all(isinstance(v, int) and not isinstance(v, bool)
                      for v in raw))
        if not ok:
            raise InvalidField("tracked_nodes must be a list of node ids")
        tracked = [int(v) for v in raw]

    return SessionState(
        seq=state.seq,
        playback_time=float(playback_time),
        playing=playing,
        config=PlaybackConfig(scale=float(scale), speed=float(speed),
                              axis_mask=axis_mask),
        active_model=active_model,
        tracked_nodes=tracked,
        duration_s=float(duration),
    )


class Room:
    """One shared session: members, authoritative state, scan buffer."""

    def __init__(self, room_id, max_users=DEFAULT_MAX_USERS,
                 scan_buffer_points=DEFAULT_SCAN_BUFFER_POINTS):
        self.room_id = room_id
        self.max_users = int(max_users)
        self.scan_buffer_points = int(scan_buffer_points)
        self.state = SessionState()
        self.users = {}
        self.scan_buffer = deque()
        self._buffered_points = 0
        self._next_user_id = 1
        self._last_batch_seq = {}

    @property
    def empty(self):
        return not self.users

    def roster(self):
        return [self.users[k] for k in sorted(self.users)]

    def join(self, name):
        if not isinstance(name, str) or not name.strip():
            raise InvalidName("display name must be non-empty")
        if len(self.users) >= self.max_users:
            raise RoomFull("room %r is at its %d-user cap"
                           % (self.room_id, self.max_users))
        user = UserPresence(
            user_id=self._next_user_id, name=name,
            color=_PALETTE[(self._next_user_id - 1) % len(_PALETTE)])
        self._next_user_id += 1
        self.users[user.user_id] = user
        return user

    def leave(self, user_id):
        self._require_member(user_id)
        del self.users[user_id]
        self._last_batch_seq.pop(user_id, None)

    def apply_update(self, user_id, update):
        self._require_member(user_id)
        new = merged_state(self.state, update)
        new.seq = self.state.seq + 1
        self.state = new
        return new

    def set_pointer(self, user_id, origin, direction):
        self._require_member(user_id)
        self.users[user_id].pointer = (tuple(origin), tuple(direction))

    def add_scan_batch(self, user_id, batch_seq, points):
        """Accept the next batch from a publisher and buffer it.

        The buffer is capped by total point count; oldest batches are
        dropped whole until the cap holds again.
        """
        self._require_member(user_id)
        expected = self._last_batch_seq.get(user_id, 0) + 1
        if batch_seq != expected:
            raise OutOfOrderBatch(
                "expected batch %d from user %d, got %r"
                % (expected, user_id, batch_seq))
        self._last_batch_seq[user_id] = batch_seq
        batch = ScanBatch(publisher=user_id, batch_seq=batch_seq,
                          points=[list(p) for p in points])
        self.scan_buffer.append(batch)
        self._buffered_points += len(batch.points)
        while self._buffered_points > self.scan_buffer_points \
                and self.scan_buffer:
            dropped = self.scan_buffer.popleft()
            self._buffered_points -= len(dropped.points)
        return batch

    def _require_member(self, user_id):
        if user_id not in self.users:
            raise NotAMember("user %r is not in room %r"
                             % (user_id, self.room_id))


class RoomManager:
    """Rooms by id, created on first join, dropped when empty."""

    def __init__(self, max_users=DEFAULT_MAX_USERS,
                 scan_buffer_points=DEFAULT_SCAN_BUFFER_POINTS):
        self.max_users = int(max_users)
        self.scan_buffer_points = int(scan_buffer_points)
        self.rooms = {}

    def get_or_create(self, room_id):
        if not isinstance(room_id, str) or not room_id:
            raise InvalidName("room id must be a non-empty string")
        room = self.rooms.get(room_id)
        if room is None:
            room = Room(room_id, max_users=self.max_users,
                        scan_buffer_points=self.scan_buffer_points)
            self.rooms[room_id] = room
        return room

    def drop_if_empty(self, room_id):
        room = self.rooms.get(room_id)
        if room is not None and room.empty:
            del self.rooms[room_id]
