"""
Deflection playback, color coding, and the serviceability screen
================================================================

Builds a small bridge-deck scene from scratch: a laser-scan-like point
cloud over a line of model nodes, a displacement history in which the
midspan briefly deflects past the allowable limit, and then the full
inspection pass. Points are bound to their nearest nodes, a deformed
and color-coded frame is exported as PLY, the tracked midspan node
reports its warning intervals, and the serviceability check gives the
per-node verdict.
"""

import os
import tempfile

import numpy as np

import bridgeroom as br

out_dir = tempfile.mkdtemp(prefix="bridgeroom_demo_")

# ---------------------------------------------------------------------------
# (1) The structure: 11 nodes along a 128 in (3.25 m) span. The
#     serviceability limit is span/1000 = 0.128 in.
# ---------------------------------------------------------------------------
span_m = 128.0 * br.METERS_PER_INCH
node_ids = list(range(1, 12))
node_x = np.linspace(0.0, span_m, 11)
positions = np.column_stack([node_x, np.zeros(11), np.zeros(11)])
model = br.FeaModel(node_ids=node_ids, positions=positions,
                    span_length_in=128.0, vertical_axis="z",
                    midspan_nodes=[6])
print("span %.0f in, allowable deflection %.3f in"
      % (model.span_length_in, model.limit_in))

# ---------------------------------------------------------------------------
# (2) A scan of the deck: points scattered around the node line, the
#     way a TLS cloud hugs the real surface.
# ---------------------------------------------------------------------------
rng = np.random.default_rng(7)
n_points = 4000
cloud = br.PointCloud(points=np.column_stack([
    rng.uniform(0.0, span_m, n_points),
    rng.uniform(-0.3, 0.3, n_points),
    rng.normal(0.0, 0.01, n_points),
]))
binding = br.bind_points(cloud, model)
print("bound %d points to %d nodes" % (n_points, len(set(binding.node_ids))))

# ---------------------------------------------------------------------------
# (3) Displacement history: a half-sine deflection shape pulsing at
#     2 Hz whose midspan peak reaches 0.135 in, just past the limit.
# ---------------------------------------------------------------------------
dt, duration = 0.01, 4.0
n = int(np.floor(duration / dt)) + 1
t = np.arange(n) * dt
peak = 0.135 * br.METERS_PER_INCH
shape = np.sin(np.pi * node_x / span_m)          # half sine over the span
pulse = np.sin(2.0 * np.pi * 2.0 * t)            # 2 Hz oscillation
samples = {}
for i, nid in enumerate(node_ids):
    z = -peak * shape[i] * pulse                 # downward positive pulse
    samples[nid] = np.column_stack([np.zeros(n), np.zeros(n), z])
history = br.DisplacementHistory(dt=dt, duration=duration, samples=samples)

# ---------------------------------------------------------------------------
# (4) Export one deformed, color-coded frame at the instant of peak
#     response. Scale exaggerates the geometry; colors stay tied to
#     the real displacement against the limit.
# ---------------------------------------------------------------------------
t_peak = 0.125  # first crest of the 2 Hz pulse
cfg = br.PlaybackConfig(scale=200.0, speed=1.0, axis_mask=(0, 0, 1))
frame = br.export_frame(cloud, binding, history, t_peak, cfg, model)
frame_path = os.path.join(out_dir, "deformed_frame.ply")
with open(frame_path, "wb") as fh:
    fh.write(br.save_ply(frame))
reds = int(np.sum(np.all(frame.colors == (255, 0, 0), axis=1)))
print("wrote %s (%d points, %d at the red end of the ramp)"
      % (frame_path, n_points, reds))

# ---------------------------------------------------------------------------
# (5) Track the midspan node: contiguous intervals above the limit
#     become warnings, the same signal the viewer shows as a banner.
# ---------------------------------------------------------------------------
trace = br.track_nodes(history, [6], model)[0]
print()
print("midspan node 6 warning intervals [s]:")
for start, end in trace.warnings:
    print("  %.2f .. %.2f" % (start, end))

# ---------------------------------------------------------------------------
# (6) The serviceability verdict over the whole node set.
# ---------------------------------------------------------------------------
report = br.check_serviceability(history, model)
print()
print("per-node peaks (limit %.3f in):" % report.limit_in)
for entry in report.entries:
    flag = "VIOLATED" if entry.violated else "ok"
    print("  node %2d: %.4f in at t=%.2f s  %s"
          % (entry.node_id, entry.peak_in, entry.t_peak, flag))
print("violations:", report.violations)
