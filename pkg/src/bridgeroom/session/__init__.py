from .client import JoinRejected, SessionClient
from .rooms import (
    DEFAULT_MAX_USERS,
    DEFAULT_SCAN_BUFFER_POINTS,
    Room,
    RoomManager,
    ScanBatch,
    SessionState,
    UserPresence,
    merged_state,
)
from .server import RoomServer, run_server

__all__ = [
    "DEFAULT_MAX_USERS",
    "DEFAULT_SCAN_BUFFER_POINTS",
    "JoinRejected",
    "Room",
    "RoomManager",
    "RoomServer",
    "ScanBatch",
    "SessionClient",
    "SessionState",
    "UserPresence",
    "merged_state",
    "run_server",
]
