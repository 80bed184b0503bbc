"""Deformation playback: bind FEA nodes to cloud points, evaluate the
displacement field over time, color by magnitude, and check the span
serviceability limit.

Units are strict: geometry and displacement data are meters; the
serviceability limit is span/1000 in inches with 1 in = 0.0254 m
exactly. All threshold comparisons happen in inches so the panel
verdicts and the report verdicts can never disagree. The playback
scale and axis mask are visual aids and never enter a verdict.
"""

import io
from dataclasses import dataclass

import numpy as np

from . import jsonio
from .errors import (
    EmptyCloud,
    EmptyModel,
    NodeSetMismatch,
    NonPositiveLimit,
    OutOfRange,
    UnknownNode,
)
from .pointcloud import PointCloud

METERS_PER_INCH = 0.0254

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


# ------------------------------------------------------------------ structures

@dataclass(eq=False)
class FeaModel:
    """Node geometry plus the serviceability span."""

    node_ids: np.ndarray
    positions: np.ndarray
    span_length_in: float
    vertical_axis: str
    midspan_nodes: list

    def __post_init__(self):
        self.node_ids = np.asarray(self.node_ids, dtype=np.int64)
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.node_ids.ndim != 1 or self.positions.shape != (len(self.node_ids), 3):
            raise ValueError("need one 3-vector position per node id")
        if len(self.node_ids) == 0:
            raise EmptyModel("model has no nodes")
        if len(np.unique(self.node_ids)) != len(self.node_ids):
            raise ValueError("node ids must be unique")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")
        if not self.span_length_in > 0:
            raise ValueError("span_length_in must be > 0")
        if self.vertical_axis not in _AXIS_INDEX:
            raise ValueError("vertical_axis must be one of x, y, z")
        ids = set(int(i) for i in self.node_ids)
        self.midspan_nodes = [int(i) for i in self.midspan_nodes]
        if not set(self.midspan_nodes) <= ids:
            raise ValueError("midspan_nodes must be a subset of node ids")

    @property
    def limit_in(self):
        """Serviceability limit: span/1000, inches."""
        return self.span_length_in / 1000.0

    @property
    def vertical_index(self):
        return _AXIS_INDEX[self.vertical_axis]

    def position_of(self, node_id):
        hits = np.nonzero(self.node_ids == node_id)[0]
        if len(hits) == 0:
            raise UnknownNode("node %r not in model" % node_id)
        return self.positions[hits[0]]


@dataclass(eq=False)
class DisplacementHistory:
    """Per-node displacement time series on a uniform grid, meters."""

    dt: float
    duration: float
    samples: dict  # node_id -> (T, 3) array

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        expected = int(np.floor(self.duration / self.dt)) + 1
        cleaned = {}
        for node_id, series in self.samples.items():
            arr = np.asarray(series, dtype=np.float64)
            if arr.shape != (expected, 3):
                raise ValueError(
                    "node %r series must be (%d, 3)" % (node_id, expected))
            if not np.all(np.isfinite(arr)):
                raise ValueError("node %r series has non-finite values" % node_id)
            cleaned[int(node_id)] = arr
        if not cleaned:
            raise ValueError("history has no nodes")
        self.samples = cleaned

    @property
    def n_samples(self):
        return int(np.floor(self.duration / self.dt)) + 1

    def node_ids(self):
        return sorted(self.samples)


@dataclass(eq=False)
class BindingMap:
    """For every cloud point, the id of the FEA node driving it."""

    node_ids: np.ndarray

    def __post_init__(self):
        self.node_ids = np.asarray(self.node_ids, dtype=np.int64)
        if self.node_ids.ndim != 1:
            raise ValueError("binding must be a flat id array")

    def __len__(self):
        return len(self.node_ids)


@dataclass(eq=False)
class PlaybackConfig:
    """Visual playback controls: exaggeration, speed, per-axis enable."""

    scale: float = 1.0
    speed: float = 1.0
    axis_mask: tuple = (1, 1, 1)

    def __post_init__(self):
        if not self.scale >= 0:
            raise ValueError("scale must be >= 0")
        if not self.speed > 0:
            raise ValueError("speed must be > 0")
        mask = tuple(int(v) for v in self.axis_mask)
        if len(mask) != 3 or any(v not in (0, 1) for v in mask):
            raise ValueError("axis_mask must be three 0/1 flags")
        self.axis_mask = mask


@dataclass(eq=False)
class NodePeak:
    node_id: int
    peak_in: float
    violated: bool
    t_peak: float


@dataclass(eq=False)
class ServiceabilityReport:
    """Per-node peak vertical displacement against the span/1000 limit."""

    limit_in: float
    entries: list          # NodePeak, ascending node id
    violations: list       # node ids with violated=True, ascending


@dataclass(eq=False)
class TrackTrace:
    """Vertical displacement series of one node plus warning intervals."""

    node_id: int
    times: np.ndarray      # seconds
    vertical: np.ndarray   # meters
    warnings: list         # (t_enter, t_exit), disjoint, ordered


# ------------------------------------------------------------------- file I/O

def write_fea_model_json(model):
    doc = {
        "span_length_in": float(model.span_length_in),
        "vertical_axis": model.vertical_axis,
        "midspan_nodes": [int(i) for i in model.midspan_nodes],
        "nodes": [
            {"id": int(i), "x": float(p[0]), "y": float(p[1]),
             "z": float(p[2])}
            for i, p in zip(model.node_ids, model.positions)
        ],
    }
    return jsonio.dumps(doc, floats="data")


def read_fea_model_json(text):
    doc = jsonio.loads(text)
    nodes = doc["nodes"]
    return FeaModel(
        node_ids=[n["id"] for n in nodes],
        positions=[[n["x"], n["y"], n["z"]] for n in nodes],
        span_length_in=doc["span_length_in"],
        vertical_axis=doc["vertical_axis"],
        midspan_nodes=doc["midspan_nodes"],
    )


def write_history_csv(h):
    """Long-format CSV: every node at every time step, meters."""
    out = io.StringIO()
    out.write("time,node_id,ux,uy,uz\n")
    ids = h.node_ids()
    for k in range(h.n_samples):
        t = jsonio.format_data_float(k * h.dt)
        for node_id in ids:
            u = h.samples[node_id][k]
            out.write("%s,%d,%s,%s,%s\n" % (
                t, node_id,
                jsonio.format_data_float(u[0]),
                jsonio.format_data_float(u[1]),
                jsonio.format_data_float(u[2])))
    return out.getvalue()


def read_history_csv(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "time,node_id,ux,uy,uz":
        raise ValueError("history header must be 'time,node_id,ux,uy,uz'")
    times = []
    per_node = {}
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 5:
            raise ValueError("history rows need 5 columns")
        t = float(cells[0])
        node_id = int(cells[1])
        u = [float(cells[2]), float(cells[3]), float(cells[4])]
        if not times or t != times[-1]:
            times.append(t)
        per_node.setdefault(node_id, []).append((t, u))
    if len(times) < 2:
        raise ValueError("history needs at least 2 time steps")
    times = np.asarray(times)
    if times[0] != 0:
        raise ValueError("history must start at time 0")
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise ValueError("time must be strictly increasing")
    dt = steps[0]
    if np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise ValueError("time steps deviate from uniform spacing")
    samples = {}
    for node_id, rows in per_node.items():
        if len(rows) != len(times):
            raise ValueError("node %d missing from some time steps" % node_id)
        if any(r[0] != t for r, t in zip(rows, times)):
            raise ValueError("node %d rows out of time order" % node_id)
        samples[node_id] = np.asarray([r[1] for r in rows])
    return DisplacementHistory(dt=float(dt), duration=float(times[-1]),
                               samples=samples)


# ----------------------------------------------------------------- operations

def bind_points(pc, model):
    """Bind each point to its nearest node, ties to the lowest node id."""
    if len(pc) == 0:
        raise EmptyCloud("cannot bind an empty cloud")
    order = np.argsort(model.node_ids, kind="stable")
    ids = model.node_ids[order]
    pos = model.positions[order]
    out = np.empty(len(pc), dtype=np.int64)
    chunk = 65536
    for start in range(0, len(pc), chunk):
        pts = pc.points[start:start + chunk]
        d2 = ((pts[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
        # argmin returns the first minimum; columns are in ascending id
        # order, so exact ties resolve to the lowest node id
        out[start:start + len(pts)] = ids[np.argmin(d2, axis=1)]
    return BindingMap(node_ids=out)


def sample_displacement(h, node_id, t):
    """Displacement of one node at time t, linear between samples."""
    if node_id not in h.samples:
        raise UnknownNode("node %r not in history" % node_id)
    if not (0 <= t <= h.duration):
        raise OutOfRange("t=%r outside [0, %r]" % (t, h.duration))
    series = h.samples[node_id]
    k = int(round(t / h.dt))
    if 0 <= k < len(series) and abs(t - k * h.dt) <= 1e-9 * h.dt:
        return series[k].copy()  # exact at sample instants
    i = int(np.floor(t / h.dt))
    i = min(max(i, 0), len(series) - 2)
    w = (t - i * h.dt) / h.dt
    return (1.0 - w) * series[i] + w * series[i + 1]


def _sample_many(h, node_ids, t):
    """Sampled displacement for several nodes, one row per node."""
    return np.vstack([sample_displacement(h, int(n), t) for n in node_ids])


def deformed_positions(pc, binding, h, t, cfg):
    """Deformed point positions: p + scale * (mask * u_node(p)(t)).

    Pure function of its inputs; cfg.speed never enters (it maps wall
    clock to playback time upstream).
    """
    if len(binding) != len(pc):
        raise ValueError("binding does not cover the cloud")
    unique_ids, inverse = np.unique(binding.node_ids, return_inverse=True)
    u = _sample_many(h, unique_ids, t)
    mask = np.asarray(cfg.axis_mask, dtype=np.float64)
    offsets = cfg.scale * (mask * u)
    return pc.points + offsets[inverse]


def color_by_displacement(magnitudes, limit):
    """Map displacement magnitudes (meters) to RGB through blue-green-red.

    v = clamp(|u| / limit, 0, 1); v=0 is (0,0,255), v=0.5 is
    (0,255,0), v=1 is (255,0,0); linear between stops, rounded half-up.
    """
    if not limit > 0:
        raise NonPositiveLimit("limit must be > 0")
    mags = np.abs(np.asarray(magnitudes, dtype=np.float64)).reshape(-1)
    v = np.clip(mags / limit, 0.0, 1.0)
    lo = v <= 0.5
    r = np.where(lo, 0.0, 510.0 * (v - 0.5))
    g = np.where(lo, 510.0 * v, 255.0 - 510.0 * (v - 0.5))
    b = np.where(lo, 255.0 - 510.0 * v, 0.0)
    rgb = np.stack([r, g, b], axis=1)
    return np.floor(rgb + 0.5).astype(np.uint8)


def check_serviceability(h, model):
    """Peak vertical displacement per node against span/1000.

    The verdict uses raw physical displacement; playback configuration
    cannot change it. History and model must cover identical node sets.
    """
    hist_ids = set(h.samples)
    model_ids = set(int(i) for i in model.node_ids)
    if hist_ids != model_ids:
        raise NodeSetMismatch(
            "history nodes %s != model nodes %s"
            % (sorted(hist_ids), sorted(model_ids)))
    limit_in = model.limit_in
    axis = model.vertical_index
    entries = []
    violations = []
    for node_id in sorted(hist_ids):
        vert_in = np.abs(h.samples[node_id][:, axis]) / METERS_PER_INCH
        k = int(np.argmax(vert_in))
        peak_in = float(vert_in[k])
        violated = peak_in > limit_in
        entries.append(NodePeak(node_id=node_id, peak_in=peak_in,
                                violated=violated, t_peak=k * h.dt))
        if violated:
            violations.append(node_id)
    return ServiceabilityReport(limit_in=limit_in, entries=entries,
                                violations=violations)


def track_nodes(h, node_ids, model):
    """Vertical displacement traces with warning intervals.

    Interval bounds lie on sample instants; a single exceeding sample
    yields a zero-length interval.
    """
    limit_in = model.limit_in
    axis = model.vertical_index
    times = np.arange(h.n_samples) * h.dt
    traces = []
    for node_id in node_ids:
        node_id = int(node_id)
        if node_id not in h.samples:
            raise UnknownNode("node %r not in history" % node_id)
        vertical = h.samples[node_id][:, axis].copy()
        exceed = np.abs(vertical) / METERS_PER_INCH > limit_in
        warnings = []
        k = 0
        while k < len(exceed):
            if exceed[k]:
                start = k
                while k + 1 < len(exceed) and exceed[k + 1]:
                    k += 1
                warnings.append((start * h.dt, k * h.dt))
            k += 1
        traces.append(TrackTrace(node_id=node_id, times=times,
                                 vertical=vertical, warnings=warnings))
    return traces


def export_frame(pc, binding, h, t, cfg, model):
    """One playback frame as a colored cloud.

    Positions follow deformed_positions; colors map the magnitude of
    the raw masked displacement (no scale) against the serviceability
    limit so the palette carries engineering meaning.
    """
    positions = deformed_positions(pc, binding, h, t, cfg)
    unique_ids, inverse = np.unique(binding.node_ids, return_inverse=True)
    u = _sample_many(h, unique_ids, t)
    mask = np.asarray(cfg.axis_mask, dtype=np.float64)
    mags = np.linalg.norm((mask * u)[inverse], axis=1)
    colors = color_by_displacement(mags, model.limit_in * METERS_PER_INCH)
    return PointCloud(points=positions, colors=colors, name=pc.name,
                      coord_dtype=pc.coord_dtype)
