"""Structural health monitoring workbench: point cloud handling,
covariance-driven modal identification, deformation playback with a
serviceability check, and a room-based collaboration server."""

from . import errors
from .deformation import (
    METERS_PER_INCH,
    BindingMap,
    DisplacementHistory,
    FeaModel,
    PlaybackConfig,
    ServiceabilityReport,
    TrackTrace,
    bind_points,
    check_serviceability,
    color_by_displacement,
    deformed_positions,
    export_frame,
    read_fea_model_json,
    read_history_csv,
    sample_displacement,
    track_nodes,
    write_fea_model_json,
    write_history_csv,
)
from .oma import (
    ModalSet,
    Mode,
    ModeMatchReport,
    SsiConfig,
    StabilizationDiagram,
    StateSpaceRealization,
    VibrationRecord,
    chain_matrices,
    correlation_toeplitz,
    mac,
    match_modes,
    modal_damping_matrix,
    modal_set_to_dict,
    newmark_response,
    normalize_shape,
    read_modal_set_json,
    read_record_csv,
    simulate_mdof,
    ssi_cov,
    stabilization_sweep,
    write_modal_set_json,
    write_record_csv,
)
from .pointcloud import (
    Aabb,
    PointCloud,
    RigidTransform,
    apply_transform,
    bounding_box,
    load_ply,
    save_ply,
    voxel_downsample,
)
from .session import (
    JoinRejected,
    Room,
    RoomManager,
    RoomServer,
    ScanBatch,
    SessionClient,
    SessionState,
    UserPresence,
    run_server,
)

__version__ = "0.1.0"

__all__ = [
    "Aabb",
    "BindingMap",
    "DisplacementHistory",
    "FeaModel",
    "JoinRejected",
    "METERS_PER_INCH",
    "ModalSet",
    "Mode",
    "ModeMatchReport",
    "PlaybackConfig",
    "PointCloud",
    "RigidTransform",
    "Room",
    "RoomManager",
    "RoomServer",
    "ScanBatch",
    "ServiceabilityReport",
    "SessionClient",
    "SessionState",
    "SsiConfig",
    "StabilizationDiagram",
    "StateSpaceRealization",
    "TrackTrace",
    "UserPresence",
    "VibrationRecord",
    "apply_transform",
    "bind_points",
    "bounding_box",
    "chain_matrices",
    "check_serviceability",
    "color_by_displacement",
    "correlation_toeplitz",
    "deformed_positions",
    "errors",
    "export_frame",
    "load_ply",
    "mac",
    "match_modes",
    "modal_damping_matrix",
    "modal_set_to_dict",
    "newmark_response",
    "normalize_shape",
    "read_fea_model_json",
    "read_history_csv",
    "read_modal_set_json",
    "read_record_csv",
    "run_server",
    "sample_displacement",
    "save_ply",
    "simulate_mdof",
    "ssi_cov",
    "stabilization_sweep",
    "track_nodes",
    "voxel_downsample",
    "write_fea_model_json",
    "write_history_csv",
    "write_modal_set_json",
    "write_record_csv",
]
