"""Point-cloud ingestion, down-sampling, rigid transforms and PLY I/O.

The PLY dialect handled here is deliberately narrow: one vertex element
with x, y, z as float32 or float64 plus optional red, green, blue as
uint8, an optional face element that is skipped, ascii or little-endian
binary encoding. Binary files round-trip bit-exactly. Coordinates are
held as float64 internally regardless of the file's precision class;
the class is remembered and re-emitted on save.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyCloud,
    MalformedHeader,
    MissingCoordinateProperty,
    NonOrthonormalRotation,
    NonPositiveVoxelSize,
    TruncatedBody,
    UnsupportedEncoding,
)

_COORD_TYPES = {"float": "float32", "float32": "float32",
                "double": "float64", "float64": "float64"}
_COLOR_TYPES = {"uchar", "uint8"}
_SCALAR_SIZES = {"char": 1, "int8": 1, "uchar": 1, "uint8": 1,
                 "short": 2, "int16": 2, "ushort": 2, "uint16": 2,
                 "int": 4, "int32": 4, "uint": 4, "uint32": 4,
                 "float": 4, "float32": 4, "double": 8, "float64": 8}
_INT_DTYPES = {"char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
               "short": "<i2", "int16": "<i2", "ushort": "<u2", "uint16": "<u2",
               "int": "<i4", "int32": "<i4", "uint": "<u4", "uint32": "<u4"}


@dataclass(eq=False)
class PointCloud:
    """Positions in meters with optional per-point RGB colors."""

    points: np.ndarray
    colors: np.ndarray | None = None
    name: str = ""
    coord_dtype: str = "float64"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be an (N, 3) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        self.points = pts
        if self.colors is not None:
            cols = np.asarray(self.colors)
            if cols.size == 0:
                cols = cols.reshape(0, 3)
            if cols.shape != pts.shape:
                raise ValueError("colors must match points one to one")
            self.colors = cols.astype(np.uint8)
        if self.coord_dtype not in ("float32", "float64"):
            raise ValueError("coord_dtype must be float32 or float64")

    def __len__(self):
        return self.points.shape[0]


@dataclass(eq=False)
class RigidTransform:
    """Rotation (orthonormal, det +1) plus translation, meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64)
        self.translation = np.asarray(self.translation, dtype=np.float64)
        if self.rotation.shape != (3, 3) or self.translation.shape != (3,):
            raise ValueError("rotation must be 3x3 and translation a 3-vector")
        _check_rotation(self.rotation)

    def inverse(self):
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)


@dataclass(eq=False)
class Aabb:
    """Axis-aligned bounding box, componentwise min <= max."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        self.min = np.asarray(self.min, dtype=np.float64)
        self.max = np.asarray(self.max, dtype=np.float64)
        if self.min.shape != (3,) or self.max.shape != (3,):
            raise ValueError("min and max must be 3-vectors")
        if np.any(self.min > self.max):
            raise ValueError("min must not exceed max")


def _check_rotation(r, tol=1e-9):
    if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
        raise NonOrthonormalRotation("R^T R deviates from identity beyond 1e-9")
    if abs(np.linalg.det(r) - 1.0) > tol:
        raise NonOrthonormalRotation("det(R) deviates from +1 beyond 1e-9")


# ------------------------------------------------------------------ PLY input

class _Element:
    def __init__(self, name, count):
        self.name = name
        self.count = count
        self.properties = []  # (kind, spec); kind is 'scalar' or 'list'


def _parse_header(data):
    end = data.find(b"end_header\n")
    if end < 0:
        raise MalformedHeader("no end_header line")
    header = data[:end].decode("ascii", errors="replace")
    body = data[end + len(b"end_header\n"):]
    lines = [ln.rstrip("\r") for ln in header.split("\n")]
    if not lines or lines[0].strip() != "ply":
        raise MalformedHeader("file does not start with 'ply'")

    fmt = None
    elements = []
    for raw in lines[1:]:
        line = raw.strip()
        if not line or line.startswith("comment"):
            continue
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "format":
            if fmt is not None:
                raise MalformedHeader("duplicate format line")
            if len(tokens) != 3 or tokens[2] != "1.0":
                raise MalformedHeader("format line must name version 1.0")
            if tokens[1] == "ascii":
                fmt = "ascii"
            elif tokens[1] == "binary_little_endian":
                fmt = "binary"
            elif tokens[1] == "binary_big_endian":
                raise UnsupportedEncoding("big-endian PLY is not supported")
            else:
                raise MalformedHeader("unknown format %r" % tokens[1])
        elif keyword == "element":
            if len(tokens) != 3:
                raise MalformedHeader("bad element line %r" % line)
            name = tokens[1]
            if name not in ("vertex", "face"):
                raise MalformedHeader("unsupported element %r" % name)
            try:
                count = int(tokens[2])
            except ValueError:
                raise MalformedHeader("bad element count %r" % tokens[2])
            if count < 0:
                raise MalformedHeader("negative element count")
            elements.append(_Element(name, count))
        elif keyword == "property":
            if not elements:
                raise MalformedHeader("property before any element")
            if len(tokens) >= 2 and tokens[1] == "list":
                if len(tokens) != 5:
                    raise MalformedHeader("bad list property %r" % line)
                count_t, index_t, pname = tokens[2], tokens[3], tokens[4]
                if count_t not in _SCALAR_SIZES or index_t not in _SCALAR_SIZES:
                    raise MalformedHeader("unknown type in list property %r" % line)
                elements[-1].properties.append(("list", (count_t, index_t, pname)))
            else:
                if len(tokens) != 3:
                    raise MalformedHeader("bad property line %r" % line)
                ptype, pname = tokens[1], tokens[2]
                if ptype not in _SCALAR_SIZES:
                    raise MalformedHeader("unknown property type %r" % ptype)
                elements[-1].properties.append(("scalar", (ptype, pname)))
        else:
            raise MalformedHeader("unsupported header keyword %r" % keyword)

    if fmt is None:
        raise MalformedHeader("missing format line")
    names = [e.name for e in elements]
    if names.count("vertex") != 1:
        raise MalformedHeader("exactly one vertex element is required")
    return fmt, elements, body


def _vertex_layout(element):
    """Validate the vertex property list; returns (coord class, has_colors)."""
    props = element.properties
    if any(kind != "scalar" for kind, _ in props):
        raise MalformedHeader("vertex element must use scalar properties")
    names = [spec[1] for _, spec in props]
    types = [spec[0] for _, spec in props]
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise MissingCoordinateProperty("vertex element lacks %r" % axis)
    if names[:3] != ["x", "y", "z"]:
        raise MalformedHeader("coordinates must be declared in x, y, z order")
    coord_kinds = {_COORD_TYPES.get(t) for t in types[:3]}
    if None in coord_kinds or len(coord_kinds) != 1:
        raise MalformedHeader("x, y, z must share one float32/float64 type")
    rest = names[3:]
    if rest == []:
        has_colors = False
    elif rest == ["red", "green", "blue"]:
        if any(t not in _COLOR_TYPES for t in types[3:]):
            raise MalformedHeader("colors must be uint8")
        has_colors = True
    else:
        raise MalformedHeader("unsupported vertex properties %r" % rest)
    return coord_kinds.pop(), has_colors


def load_ply(data):
    """Parse the supported PLY subset into a PointCloud.

    Parameters
    ----------
    data : bytes
        Entire file content.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("load_ply expects bytes")
    data = bytes(data)
    fmt, elements, body = _parse_header(data)
    vertex = next(e for e in elements if e.name == "vertex")
    coord_class, has_colors = _vertex_layout(vertex)

    if fmt == "ascii":
        points, colors = _read_ascii(body, elements, vertex, has_colors)
    else:
        points, colors = _read_binary(body, elements, vertex, coord_class,
                                      has_colors)
    return PointCloud(points=points, colors=colors, coord_dtype=coord_class)


def _read_ascii(body, elements, vertex, has_colors):
    tokens = body.split()
    pos = 0
    points = colors = None
    for element in elements:
        if element.name == "vertex":
            width = 6 if has_colors else 3
            need = element.count * width
            if len(tokens) - pos < need:
                raise TruncatedBody("vertex data ends early")
            try:
                flat = [float(t) for t in tokens[pos:pos + need]]
            except ValueError as exc:
                raise TruncatedBody("unreadable vertex value: %s" % exc)
            arr = np.array(flat, dtype=np.float64).reshape(element.count, width)
            points = arr[:, :3]
            if has_colors:
                cols = arr[:, 3:]
                if np.any(cols < 0) or np.any(cols > 255) or \
                        np.any(cols != np.floor(cols)):
                    raise TruncatedBody("color values must be integers 0..255")
                colors = cols.astype(np.uint8)
            pos += need
        else:  # face: rows are '<count> <i0> <i1> ...'
            for _ in range(element.count):
                if pos >= len(tokens):
                    raise TruncatedBody("face data ends early")
                try:
                    n = int(tokens[pos])
                except ValueError as exc:
                    raise TruncatedBody("unreadable face count: %s" % exc)
                pos += 1 + n
                if pos > len(tokens):
                    raise TruncatedBody("face data ends early")
    if points is None:
        raise MalformedHeader("no vertex element")
    return points, colors


def _read_binary(body, elements, vertex, coord_class, has_colors):
    offset = 0
    points = colors = None
    for element in elements:
        if element.name == "vertex":
            fields = [("x", "<f4" if coord_class == "float32" else "<f8"),
                      ("y", "<f4" if coord_class == "float32" else "<f8"),
                      ("z", "<f4" if coord_class == "float32" else "<f8")]
            if has_colors:
                fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
            dtype = np.dtype(fields)
            need = dtype.itemsize * element.count
            if len(body) - offset < need:
                raise TruncatedBody("vertex data ends early")
            rows = np.frombuffer(body, dtype=dtype, count=element.count,
                                 offset=offset)
            points = np.column_stack([rows["x"], rows["y"], rows["z"]]) \
                .astype(np.float64)
            if has_colors:
                colors = np.column_stack([rows["red"], rows["green"],
                                          rows["blue"]])
            offset += need
        else:
            for _ in range(element.count):
                for kind, spec in element.properties:
                    if kind == "scalar":
                        offset += _SCALAR_SIZES[spec[0]]
                    else:
                        count_t, index_t, _ = spec
                        csize = _SCALAR_SIZES[count_t]
                        if len(body) - offset < csize:
                            raise TruncatedBody("face data ends early")
                        n = int(np.frombuffer(body, _INT_DTYPES[count_t], 1,
                                              offset)[0])
                        offset += csize + n * _SCALAR_SIZES[index_t]
                if offset > len(body):
                    raise TruncatedBody("face data ends early")
    if points is None:
        raise MalformedHeader("no vertex element")
    return points, colors


# ----------------------------------------------------------------- PLY output

def save_ply(pc, encoding="binary"):
    """Serialize a cloud to PLY bytes.

    encoding is 'binary' (little-endian, bit-exact round trip) or
    'ascii' (shortest round-trip decimals).
    """
    if encoding not in ("binary", "ascii"):
        raise ValueError("encoding must be 'binary' or 'ascii'")
    coord_name = "float" if pc.coord_dtype == "float32" else "double"
    lines = ["ply",
             "format %s 1.0" % ("ascii" if encoding == "ascii"
                                else "binary_little_endian"),
             "element vertex %d" % len(pc)]
    for axis in ("x", "y", "z"):
        lines.append("property %s %s" % (coord_name, axis))
    if pc.colors is not None:
        for chan in ("red", "green", "blue"):
            lines.append("property uchar %s" % chan)
    lines.append("end_header")
    header = ("\n".join(lines) + "\n").encode("ascii")

    if encoding == "ascii":
        out = []
        for i in range(len(pc)):
            coords = [_ascii_coord(v) for v in pc.points[i]]
            if pc.colors is not None:
                coords += [str(int(c)) for c in pc.colors[i]]
            out.append(" ".join(coords))
        body = ("\n".join(out) + ("\n" if out else "")).encode("ascii")
        return header + body

    ctype = "<f4" if pc.coord_dtype == "float32" else "<f8"
    fields = [("x", ctype), ("y", ctype), ("z", ctype)]
    if pc.colors is not None:
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
    rows = np.empty(len(pc), dtype=np.dtype(fields))
    rows["x"] = pc.points[:, 0].astype(ctype)
    rows["y"] = pc.points[:, 1].astype(ctype)
    rows["z"] = pc.points[:, 2].astype(ctype)
    if pc.colors is not None:
        rows["red"] = pc.colors[:, 0]
        rows["green"] = pc.colors[:, 1]
        rows["blue"] = pc.colors[:, 2]
    return header + rows.tobytes()


def _ascii_coord(v):
    s = repr(float(v))
    return s


# ----------------------------------------------------------------- operations

def voxel_downsample(pc, voxel_size, anchor=None):
    """Collapse points into cubic voxels, one centroid per occupied cell.

    The grid is anchored at the cloud's AABB minimum unless an explicit
    anchor is given; passing the anchor back in makes the operation
    idempotent. A point lands in voxel floor((p - anchor) / size) per
    axis, so values exactly on a boundary belong to the higher cell.
    Output order is ascending lexicographic voxel index; colors, when
    present, average componentwise with half-up rounding.
    """
    if not np.isfinite(voxel_size) or voxel_size <= 0:
        raise NonPositiveVoxelSize("voxel_size must be > 0")
    if len(pc) == 0:
        return PointCloud(points=np.zeros((0, 3)), colors=None, name=pc.name,
                          coord_dtype=pc.coord_dtype)
    if anchor is None:
        anchor = pc.points.min(axis=0)
    anchor = np.asarray(anchor, dtype=np.float64)
    idx = np.floor((pc.points - anchor) / voxel_size).astype(np.int64)
    cells, inverse = np.unique(idx, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    counts = np.bincount(inverse, minlength=len(cells)).astype(np.float64)
    sums = np.zeros((len(cells), 3))
    np.add.at(sums, inverse, pc.points)
    centroids = sums / counts[:, None]
    colors = None
    if pc.colors is not None:
        csums = np.zeros((len(cells), 3))
        np.add.at(csums, inverse, pc.colors.astype(np.float64))
        colors = np.floor(csums / counts[:, None] + 0.5).astype(np.uint8)
    return PointCloud(points=centroids, colors=colors, name=pc.name,
                      coord_dtype=pc.coord_dtype)


def apply_transform(pc, t):
    """Rotate and translate every point; colors travel unchanged."""
    _check_rotation(np.asarray(t.rotation, dtype=np.float64))
    moved = pc.points @ np.asarray(t.rotation, dtype=np.float64).T \
        + np.asarray(t.translation, dtype=np.float64)
    return PointCloud(points=moved, colors=pc.colors, name=pc.name,
                      coord_dtype=pc.coord_dtype)


def bounding_box(pc):
    """Componentwise min and max over all points."""
    if len(pc) == 0:
        raise EmptyCloud("bounding box of an empty cloud")
    return Aabb(min=pc.points.min(axis=0), max=pc.points.max(axis=0))
