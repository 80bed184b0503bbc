"""Exception types raised across the engine.

Every error is a subclass of BridgeroomError so callers can catch the
whole family with one handler; the concrete classes mirror the failure
modes named in the operation contracts.
"""


class BridgeroomError(Exception):
    """Base class for all engine errors."""


# ---------------------------------------------------------------- point clouds

class MalformedHeader(BridgeroomError):
    """PLY header violates the supported subset."""


class UnsupportedEncoding(BridgeroomError):
    """PLY format is not ascii or binary_little_endian."""


class MissingCoordinateProperty(BridgeroomError):
    """Vertex element lacks x, y or z."""


class TruncatedBody(BridgeroomError):
    """PLY body ends before the declared element counts are satisfied."""


class NonPositiveVoxelSize(BridgeroomError):
    """Voxel size must be > 0."""


class NonOrthonormalRotation(BridgeroomError):
    """Rotation matrix is not orthonormal with determinant +1."""


class EmptyCloud(BridgeroomError):
    """Operation requires at least one point."""


# ------------------------------------------------------------------------- oma

class RecordTooShort(BridgeroomError):
    """Record length N must exceed 2 * block_rows."""


class RankDeficient(BridgeroomError):
    """Requested model order exceeds the numerical rank of the data."""


class InsufficientExcitation(BridgeroomError):
    """Record carries no dynamic content (all channels constant)."""


class ZeroVector(BridgeroomError):
    """MAC is undefined for a zero vector."""


class LengthMismatch(BridgeroomError):
    """Vectors must have equal length."""


class ShapeLengthMismatch(BridgeroomError):
    """Mode shapes being compared sample different channel counts."""


class NonPositiveDefiniteMass(BridgeroomError):
    """Mass matrix must be symmetric positive-definite."""


# ----------------------------------------------------------------- deformation

class EmptyModel(BridgeroomError):
    """Model must contain at least one node."""


class OutOfRange(BridgeroomError):
    """Requested time lies outside the history window."""


class UnknownNode(BridgeroomError):
    """Node id not present in the model or history."""


class NonPositiveLimit(BridgeroomError):
    """Serviceability limit must be > 0."""


class NodeSetMismatch(BridgeroomError):
    """History and model must cover the same node ids."""


# --------------------------------------------------------------------- session

class RoomFull(BridgeroomError):
    """Room already holds the maximum number of users."""


class InvalidName(BridgeroomError):
    """User name must be non-empty."""


class NotAMember(BridgeroomError):
    """Sender has not joined the room."""


class InvalidField(BridgeroomError):
    """State update touches an unknown field or an out-of-range value."""


class OutOfOrderBatch(BridgeroomError):
    """Scan batch sequence must increment by exactly one per publisher."""
