"""Operational modal analysis: covariance-driven subspace identification.

The pipeline is the classical one: correlation lags of the record are
stacked into a block Toeplitz matrix, its SVD yields an observability
factor, and the shift invariance of that factor recovers the discrete
state matrix whose eigenvalues map to frequencies, damping ratios and
mode shapes. A stabilization sweep repeats the extraction over a range
of model orders and flags poles that persist between consecutive
orders. simulate_mdof provides synthetic records for validation.
"""

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import jsonio
from .errors import (
    InsufficientExcitation,
    LengthMismatch,
    NonPositiveDefiniteMass,
    RankDeficient,
    RecordTooShort,
    ShapeLengthMismatch,
    ZeroVector,
)

_RANK_RTOL = 1e-10  # singular values below this fraction of the largest count as zero


# -------------------------------------------------------------------- records

@dataclass(eq=False)
class VibrationRecord:
    """Uniformly sampled multichannel time series, one row per channel."""

    dt: float
    data: np.ndarray
    channel_labels: list = None

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=np.float64))
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.data.shape[1] < 2:
            raise ValueError("record needs at least 2 samples")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("record contains non-finite samples")
        if self.channel_labels is None:
            self.channel_labels = ["ch%d" % (i + 1)
                                   for i in range(self.data.shape[0])]
        if len(self.channel_labels) != self.data.shape[0]:
            raise ValueError("one label per channel required")

    @property
    def channels(self):
        return self.data.shape[0]

    @property
    def n_samples(self):
        return self.data.shape[1]

    @property
    def duration(self):
        return (self.n_samples - 1) * self.dt

    @property
    def nyquist(self):
        return 0.5 / self.dt


def write_record_csv(rec):
    """Render a record as CSV text: time column plus one column per channel."""
    out = io.StringIO()
    out.write("time," + ",".join(rec.channel_labels) + "\n")
    for k in range(rec.n_samples):
        cells = [jsonio.format_data_float(k * rec.dt)]
        cells += [jsonio.format_data_float(v) for v in rec.data[:, k]]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def read_record_csv(text):
    """Parse the CSV record format; checks uniform, strictly increasing time."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty record file")
    header = lines[0].split(",")
    if header[0].strip() != "time" or len(header) < 2:
        raise ValueError("record header must be 'time,<label>,...'")
    labels = [h.strip() for h in header[1:]]
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError("row width does not match header")
        rows.append([float(c) for c in cells])
    if len(rows) < 2:
        raise ValueError("record needs at least 2 samples")
    arr = np.asarray(rows, dtype=np.float64)
    times = arr[:, 0]
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise ValueError("time must be strictly increasing")
    dt = steps[0]
    if np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise ValueError("time steps deviate from uniform spacing")
    return VibrationRecord(dt=dt, data=arr[:, 1:].T, channel_labels=labels)


# -------------------------------------------------------------- modal objects

@dataclass(eq=False)
class SsiConfig:
    """Identification parameters: Toeplitz half-depth, state order, pole cap."""

    block_rows: int
    model_order: int
    max_damping: float = 0.20

    def validate(self, channels, n_samples):
        if self.block_rows < 1:
            raise ValueError("block_rows must be >= 1")
        if not 1 <= self.model_order <= channels * self.block_rows:
            raise ValueError("model_order must lie in [1, channels*block_rows]")
        if n_samples <= 2 * self.block_rows:
            raise RecordTooShort("need more than 2*block_rows samples")
        if not 0 < self.max_damping <= 1:
            raise ValueError("max_damping must lie in (0, 1]")


@dataclass(eq=False)
class StateSpaceRealization:
    """Discrete-time (A, C) pair recovered from the observability factor."""

    A: np.ndarray
    C: np.ndarray
    order: int


@dataclass(eq=False)
class Mode:
    """One identified or model mode.

    shape is complex, unit Euclidean length, rotated so its largest
    component is real and positive.
    """

    frequency: float
    damping: float
    shape: np.ndarray

    def __post_init__(self):
        self.shape = np.asarray(self.shape, dtype=np.complex128)


@dataclass(eq=False)
class ModalSet:
    """Modes sorted ascending by frequency; duplicates merged."""

    modes: list
    source: str = "oma"

    def __post_init__(self):
        if self.source not in ("oma", "fea"):
            raise ValueError("source must be 'oma' or 'fea'")
        self.modes = _merge_duplicate_poles(
            sorted(self.modes, key=lambda m: (m.frequency, m.damping)))

    def frequencies(self):
        return np.array([m.frequency for m in self.modes])

    def damping_ratios(self):
        return np.array([m.damping for m in self.modes])


def _merge_duplicate_poles(modes, rtol=1e-9):
    kept = []
    for m in modes:
        dup = False
        for k in kept:
            if (abs(m.frequency - k.frequency) <= rtol * k.frequency
                    and abs(m.damping - k.damping) <= rtol * max(k.damping, rtol)
                    and mac(m.shape, k.shape) >= 1 - rtol):
                dup = True
                break
        if not dup:
            kept.append(m)
    return kept


def modal_set_to_dict(ms):
    return {
        "source": ms.source,
        "modes": [
            {
                "frequency_hz": float(m.frequency),
                "damping_ratio": float(m.damping),
                "shape_re": [float(v) for v in m.shape.real],
                "shape_im": [float(v) for v in m.shape.imag],
            }
            for m in ms.modes
        ],
    }


def write_modal_set_json(ms):
    return jsonio.dumps(modal_set_to_dict(ms))


def read_modal_set_json(text):
    doc = jsonio.loads(text)
    modes = []
    for entry in doc["modes"]:
        shape = np.asarray(entry["shape_re"], dtype=np.float64) \
            + 1j * np.asarray(entry["shape_im"], dtype=np.float64)
        modes.append(Mode(frequency=float(entry["frequency_hz"]),
                          damping=float(entry["damping_ratio"]),
                          shape=shape))
    return ModalSet(modes=modes, source=doc["source"])


@dataclass(eq=False)
class StabilizationDiagram:
    """Per-order pole listing with consecutive-order stability flags."""

    entries: list            # (model_order, Mode, stable)
    tolerances: tuple        # (df_rel, dz_rel, mac_min)
    errors: list = field(default_factory=list)  # (model_order, message)

    def orders(self):
        return sorted({order for order, _, _ in self.entries})


@dataclass(eq=False)
class ModeMatchReport:
    """Greedy MAC pairing of two modal sets."""

    pairs: list              # (oma_mode, fea_mode, mac, freq_diff_rel)
    unmatched_oma: list
    unmatched_fea: list


# ------------------------------------------------------------- identification

def correlation_toeplitz(rec, block_rows):
    """Block Toeplitz matrix of output correlations.

    Correlation lags R_i = (1/(N-i)) sum_k y[k+i] y[k]^T for
    i = 1 .. 2p-1 fill the p-by-p block grid as block(r, c) = R[p+r-c].
    """
    p = int(block_rows)
    if p < 1:
        raise ValueError("block_rows must be >= 1")
    l, n = rec.data.shape
    if n <= 2 * p:
        raise RecordTooShort("record must be longer than 2*block_rows samples")
    y = rec.data
    lags = {}
    for i in range(1, 2 * p):
        lags[i] = (y[:, i:] @ y[:, :n - i].T) / (n - i)
    t = np.empty((l * p, l * p))
    for r in range(p):
        for c in range(p):
            t[r * l:(r + 1) * l, c * l:(c + 1) * l] = lags[p + r - c]
    return t


def _modes_from_realization(a, c, dt, max_damping):
    lam, vecs = np.linalg.eig(a)
    nyquist = 0.5 / dt
    modes = []
    for i in range(len(lam)):
        if lam[i].imag <= 0:
            continue  # one representative per conjugate pair
        mu = np.log(lam[i]) / dt
        w = abs(mu)
        if w == 0:
            continue
        freq = w / (2 * np.pi)
        zeta = -mu.real / w
        if not (0 < zeta < max_damping and 0 < freq < nyquist):
            continue
        shape = normalize_shape(c @ vecs[:, i])
        modes.append(Mode(frequency=freq, damping=zeta, shape=shape))
    return modes


def normalize_shape(phi):
    """Unit-length shape with its largest component rotated real-positive."""
    phi = np.asarray(phi, dtype=np.complex128)
    norm = np.linalg.norm(phi)
    if norm == 0:
        raise ZeroVector("mode shape is a zero vector")
    phi = phi / norm
    pivot = int(np.argmax(np.abs(phi)))
    angle = np.angle(phi[pivot])
    return phi * np.exp(-1j * angle)


def _observability(u, s, order):
    return u[:, :order] * np.sqrt(s[:order])


def _realization_from_svd(u, s, order, channels, rank):
    if order > rank:
        raise RankDeficient(
            "model order %d exceeds numerical rank %d" % (order, rank))
    obs = _observability(u, s, order)
    c = obs[:channels, :]
    a = np.linalg.pinv(obs[:-channels, :], rcond=_RANK_RTOL) @ obs[channels:, :]
    return a, c


def ssi_cov(rec, cfg):
    """Identify a state-space realization and its modal content.

    Returns (StateSpaceRealization, ModalSet). The record must hold
    actual dynamics: a constant record raises InsufficientExcitation.
    block_rows must be at least 2 so the observability factor has a
    block row to shift.
    """
    cfg.validate(rec.channels, rec.n_samples)
    if cfg.block_rows < 2:
        raise ValueError("ssi_cov needs block_rows >= 2 for the shift")
    if np.all(np.ptp(rec.data, axis=1) == 0):
        raise InsufficientExcitation("record has no dynamic content")
    t = correlation_toeplitz(rec, cfg.block_rows)
    u, s, _ = np.linalg.svd(t, full_matrices=False)
    rank = int(np.sum(s >= _RANK_RTOL * s[0])) if s[0] > 0 else 0
    if rank == 0:
        raise InsufficientExcitation("correlation matrix is numerically zero")
    a, c = _realization_from_svd(u, s, cfg.model_order, rec.channels, rank)
    modes = _modes_from_realization(a, c, rec.dt, cfg.max_damping)
    return (StateSpaceRealization(A=a, C=c, order=cfg.model_order),
            ModalSet(modes=modes, source="oma"))


def stabilization_sweep(rec, orders, block_rows, tolerances=(0.01, 0.05, 0.98),
                        max_damping=0.20):
    """Extract poles over a range of model orders and flag persistent ones.

    A mode at one order is stable when some mode at the previous swept
    order agrees in frequency within df_rel, in damping within dz_rel,
    and in shape with MAC >= mac_min. Modes at the lowest order are
    unstable by definition. Per-order failures are recorded in the
    diagram instead of aborting the sweep. The Toeplitz SVD is shared
    across orders; the per-order result is identical to ssi_cov run at
    that order.
    """
    orders = [int(n) for n in orders]
    if not orders:
        raise ValueError("orders must be nonempty")
    df_rel, dz_rel, mac_min = tolerances
    if np.all(np.ptp(rec.data, axis=1) == 0):
        raise InsufficientExcitation("record has no dynamic content")
    t = correlation_toeplitz(rec, block_rows)
    u, s, _ = np.linalg.svd(t, full_matrices=False)
    rank = int(np.sum(s >= _RANK_RTOL * s[0])) if s[0] > 0 else 0
    if rank == 0:
        raise InsufficientExcitation("correlation matrix is numerically zero")

    entries = []
    errors = []
    prev_modes = None
    for order in orders:
        try:
            if not 1 <= order <= rec.channels * block_rows:
                raise ValueError("model order %d out of range" % order)
            a, c = _realization_from_svd(u, s, order, rec.channels, rank)
            modes = _modes_from_realization(a, c, rec.dt, max_damping)
        except Exception as exc:
            errors.append((order, "%s: %s" % (type(exc).__name__, exc)))
            prev_modes = None
            continue
        for m in modes:
            stable = False
            if prev_modes is not None:
                for pm in prev_modes:
                    if (abs(m.frequency - pm.frequency) <= df_rel * pm.frequency
                            and abs(m.damping - pm.damping) <= dz_rel * pm.damping
                            and mac(m.shape, pm.shape) >= mac_min):
                        stable = True
                        break
            entries.append((order, m, stable))
        prev_modes = modes
    return StabilizationDiagram(entries=entries,
                                tolerances=(df_rel, dz_rel, mac_min),
                                errors=errors)


# ----------------------------------------------------------------- comparison

def mac(a, b):
    """Modal assurance criterion between two complex vectors, in [0, 1]."""
    a = np.asarray(a, dtype=np.complex128).reshape(-1)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    if a.shape != b.shape:
        raise LengthMismatch("vectors differ in length")
    aa = np.vdot(a, a).real
    bb = np.vdot(b, b).real
    if aa == 0 or bb == 0:
        raise ZeroVector("MAC of a zero vector")
    val = abs(np.vdot(a, b)) ** 2 / (aa * bb)
    return float(min(max(val, 0.0), 1.0))


def match_modes(oma_set, fea_set, mac_min=0.0):
    """Pair modes greedily on descending MAC.

    Pairs below mac_min are not formed. freq_diff_rel is
    (f_oma - f_fea) / f_fea for each pair.
    """
    if oma_set.modes and fea_set.modes:
        la = len(oma_set.modes[0].shape)
        lb = len(fea_set.modes[0].shape)
        if la != lb:
            raise ShapeLengthMismatch(
                "shape lengths differ: %d vs %d" % (la, lb))
    table = np.zeros((len(oma_set.modes), len(fea_set.modes)))
    for i, mo in enumerate(oma_set.modes):
        for j, mf in enumerate(fea_set.modes):
            table[i, j] = mac(mo.shape, mf.shape)
    pairs = []
    used_o = set()
    used_f = set()
    while True:
        best = None
        for i in range(table.shape[0]):
            if i in used_o:
                continue
            for j in range(table.shape[1]):
                if j in used_f:
                    continue
                if best is None or table[i, j] > table[best[0], best[1]]:
                    best = (i, j)
        if best is None or table[best[0], best[1]] < mac_min:
            break
        i, j = best
        mo, mf = oma_set.modes[i], fea_set.modes[j]
        pairs.append((mo, mf, table[i, j],
                      (mo.frequency - mf.frequency) / mf.frequency))
        used_o.add(i)
        used_f.add(j)
    unmatched_oma = [m for i, m in enumerate(oma_set.modes) if i not in used_o]
    unmatched_fea = [m for j, m in enumerate(fea_set.modes) if j not in used_f]
    return ModeMatchReport(pairs=pairs, unmatched_oma=unmatched_oma,
                           unmatched_fea=unmatched_fea)


# ------------------------------------------------------------------ simulator

def chain_matrices(masses, stiffnesses):
    """Mass and stiffness matrices for a grounded spring chain.

    stiffnesses[0] ties the first mass to ground; stiffnesses[i]
    couples mass i-1 to mass i.
    """
    masses = np.asarray(masses, dtype=np.float64)
    stiffnesses = np.asarray(stiffnesses, dtype=np.float64)
    if masses.ndim != 1 or masses.shape != stiffnesses.shape:
        raise ValueError("masses and stiffnesses must be equal-length vectors")
    n = len(masses)
    m = np.diag(masses)
    k = np.zeros((n, n))
    for i, ki in enumerate(stiffnesses):
        k[i, i] += ki
        if i > 0:
            k[i - 1, i - 1] += ki
            k[i - 1, i] -= ki
            k[i, i - 1] -= ki
    return m, k


def modal_damping_matrix(mass, stiffness, zetas):
    """Damping matrix giving each undamped mode the requested ratio."""
    mass = np.asarray(mass, dtype=np.float64)
    stiffness = np.asarray(stiffness, dtype=np.float64)
    zetas = np.asarray(zetas, dtype=np.float64)
    evals, phi = sla.eigh(stiffness, mass)
    wn = np.sqrt(np.maximum(evals, 0.0))
    if len(zetas) != len(wn):
        raise ValueError("one damping ratio per mode required")
    return mass @ phi @ np.diag(2.0 * zetas * wn) @ phi.T @ mass


def newmark_response(mass, stiffness, damping, excitation, dt, n_steps,
                     x0=None, v0=None, substeps=1):
    """Average-acceleration Newmark integration (beta 1/4, gamma 1/2).

    excitation has one column per output instant (n_steps + 1 columns).
    With substeps > 1 each excitation sample is held constant over its
    step and the integration runs at dt/substeps internally; outputs
    are still emitted at dt. Returns (displacement, velocity,
    acceleration) arrays of shape (ndof, n_steps + 1).
    """
    m = _as_mass_matrix(mass)
    ndof = m.shape[0]
    k = _check_symmetric(np.asarray(stiffness, dtype=np.float64), "stiffness")
    c = _check_symmetric(np.asarray(damping, dtype=np.float64), "damping")
    if k.shape != (ndof, ndof) or c.shape != (ndof, ndof):
        raise ValueError("matrix dimensions disagree")
    f = np.atleast_2d(np.asarray(excitation, dtype=np.float64))
    if f.shape != (ndof, n_steps + 1):
        raise ValueError("excitation must be (ndof, n_steps+1)")
    substeps = int(substeps)
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if substeps > 1:
        fine = np.repeat(f[:, :n_steps], substeps, axis=1)
        fine = np.hstack([fine, f[:, n_steps:n_steps + 1]])
        x, v, a = _newmark_core(m, c, k, fine, dt / substeps,
                                n_steps * substeps, x0, v0)
        step = slice(None, None, substeps)
        return x[:, step], v[:, step], a[:, step]
    return _newmark_core(m, c, k, f, dt, n_steps, x0, v0)


def _newmark_core(m, c, k, f, h, n_steps, x0, v0):
    beta, gamma = 0.25, 0.5
    ndof = m.shape[0]
    x = np.zeros((ndof, n_steps + 1))
    v = np.zeros((ndof, n_steps + 1))
    a = np.zeros((ndof, n_steps + 1))
    if x0 is not None:
        x[:, 0] = np.asarray(x0, dtype=np.float64)
    if v0 is not None:
        v[:, 0] = np.asarray(v0, dtype=np.float64)
    a[:, 0] = np.linalg.solve(m, f[:, 0] - c @ v[:, 0] - k @ x[:, 0])
    keff = k + (gamma / (beta * h)) * c + (1.0 / (beta * h * h)) * m
    lu = sla.lu_factor(keff)
    c1 = 1.0 / (beta * h * h)
    c2 = 1.0 / (beta * h)
    c3 = 1.0 / (2 * beta) - 1.0
    c4 = gamma / (beta * h)
    c5 = gamma / beta - 1.0
    c6 = h * (gamma / (2 * beta) - 1.0)
    for i in range(n_steps):
        rhs = (f[:, i + 1]
               + m @ (c1 * x[:, i] + c2 * v[:, i] + c3 * a[:, i])
               + c @ (c4 * x[:, i] + c5 * v[:, i] + c6 * a[:, i]))
        x[:, i + 1] = sla.lu_solve(lu, rhs)
        a[:, i + 1] = (c1 * (x[:, i + 1] - x[:, i]) - c2 * v[:, i]
                       - c3 * a[:, i])
        v[:, i + 1] = v[:, i] + h * ((1 - gamma) * a[:, i]
                                     + gamma * a[:, i + 1])
    return x, v, a


def _as_mass_matrix(mass):
    m = np.asarray(mass, dtype=np.float64)
    if m.ndim == 1:
        m = np.diag(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonPositiveDefiniteMass("mass must be a square matrix or vector")
    if not np.allclose(m, m.T, rtol=1e-9, atol=0):
        raise NonPositiveDefiniteMass("mass matrix must be symmetric")
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NonPositiveDefiniteMass("mass matrix must be positive-definite")
    return m


def _check_symmetric(mat, label):
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("%s must be a square matrix" % label)
    if not np.allclose(mat, mat.T, rtol=1e-9, atol=1e-12):
        raise ValueError("%s matrix must be symmetric" % label)
    return mat


def simulate_mdof(mass, stiffness, damping, excitation, dt, duration,
                  x0=None, v0=None, substeps=1, channel_labels=None):
    """Simulate a linear MDOF system and return its acceleration record.

    excitation is a per-DOF time series with one column per output
    instant, i.e. round(duration/dt) + 1 columns. Initial conditions
    default to rest. substeps refines the internal integration grid
    while keeping the output rate; excitation samples are then held
    constant over each output step.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    n_steps = int(round(duration / dt))
    if n_steps < 1:
        raise ValueError("duration must cover at least one step")
    _, _, acc = newmark_response(mass, stiffness, damping, excitation, dt,
                                 n_steps, x0=x0, v0=v0, substeps=substeps)
    return VibrationRecord(dt=dt, data=acc, channel_labels=channel_labels)
