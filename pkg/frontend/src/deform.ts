/**
 * Deformation playback math, matching the engine bit for bit.
 *
 * The engine publishes the exact formulas (see docs/FORMATS.md and
 * the serviceability report semantics): deformed position is
 * p + scale * (mask * u(t)), displacement interpolation is linear
 * with an exact snap at sample instants, the colormap ramps
 * blue-green-red over |u|/limit, and a node violates serviceability
 * iff its peak |vertical|/0.0254 exceeds span/1000 inches. All math
 * here is float64, evaluated in the same operation order as the
 * engine, so a frame computed in the browser equals the engine's
 * exported frame exactly.
 */

import { FeaModel, DisplacementHistory } from "./formats";

export const METERS_PER_INCH = 0.0254;

export interface PlaybackSettings {
  scale: number;
  axisMask: [number, number, number];
}

/** Nearest model node for each point; ties break to the lowest id. */
export function bindPoints(points: Float64Array, model: FeaModel):
    Int32Array {
  const n = points.length / 3;
  if (n === 0) throw new Error("empty cloud");
  const ids = model.nodeIds; // sorted ascending
  const pos = model.positions;
  const out = new Int32Array(n);
  for (let i = 0; i < n; i++) {
    const x = points[3 * i], y = points[3 * i + 1], z = points[3 * i + 2];
    let best = -1;
    let bestDist = Infinity;
    for (let j = 0; j < ids.length; j++) {
      const dx = x - pos[3 * j];
      const dy = y - pos[3 * j + 1];
      const dz = z - pos[3 * j + 2];
      // squared distance, summed in the engine's order; no sqrt, so
      // winners match the engine even where sqrt would round ties
      const d2 = (dx * dx + dy * dy) + dz * dz;
      if (d2 < bestDist) {
        bestDist = d2;
        best = j;
      }
    }
    out[i] = ids[best];
  }
  return out;
}

/** Displacement of one node at time t: exact at sample instants
 *  (within 1e-9 * dt), linear in between. */
export function sampleDisplacement(h: DisplacementHistory, nodeId: number,
                                   t: number): [number, number, number] {
  const series = h.samples.get(nodeId);
  if (!series) throw new Error(`node ${nodeId} not in history`);
  if (!(t >= 0 && t <= h.duration)) {
    throw new Error(`t=${t} outside [0, ${h.duration}]`);
  }
  const nSamples = series.length / 3;
  const k = Math.round(t / h.dt);
  if (k >= 0 && k < nSamples && Math.abs(t - k * h.dt) <= 1e-9 * h.dt) {
    return [series[3 * k], series[3 * k + 1], series[3 * k + 2]];
  }
  let i = Math.floor(t / h.dt);
  i = Math.min(Math.max(i, 0), nSamples - 2);
  const w = (t - i * h.dt) / h.dt;
  return [
    (1.0 - w) * series[3 * i] + w * series[3 * (i + 1)],
    (1.0 - w) * series[3 * i + 1] + w * series[3 * (i + 1) + 1],
    (1.0 - w) * series[3 * i + 2] + w * series[3 * (i + 1) + 2],
  ];
}

/** Deformed positions: p + scale * (mask * u). speed never enters. */
export function deformedPositions(points: Float64Array, binding: Int32Array,
                                  h: DisplacementHistory, t: number,
                                  cfg: PlaybackSettings): Float64Array {
  const n = points.length / 3;
  if (binding.length !== n) throw new Error("binding does not cover cloud");
  const u = sampleBound(binding, h, t);
  const out = new Float64Array(points.length);
  const [mx, my, mz] = cfg.axisMask;
  for (let i = 0; i < n; i++) {
    const row = u.get(binding[i])!;
    out[3 * i] = points[3 * i] + cfg.scale * (mx * row[0]);
    out[3 * i + 1] = points[3 * i + 1] + cfg.scale * (my * row[1]);
    out[3 * i + 2] = points[3 * i + 2] + cfg.scale * (mz * row[2]);
  }
  return out;
}

function sampleBound(binding: Int32Array, h: DisplacementHistory, t: number):
    Map<number, [number, number, number]> {
  const u = new Map<number, [number, number, number]>();
  for (const nodeId of binding) {
    if (!u.has(nodeId)) u.set(nodeId, sampleDisplacement(h, nodeId, t));
  }
  return u;
}

/** Blue-green-red ramp over |magnitude| / limit, rounded half up. */
export function colorByDisplacement(magnitudes: Float64Array, limit: number):
    Uint8Array {
  if (!(limit > 0)) throw new Error("limit must be > 0");
  const out = new Uint8Array(magnitudes.length * 3);
  for (let i = 0; i < magnitudes.length; i++) {
    let v = Math.abs(magnitudes[i]) / limit;
    if (v < 0) v = 0;
    if (v > 1) v = 1;
    let r: number, g: number, b: number;
    if (v <= 0.5) {
      r = 0.0;
      g = 510.0 * v;
      b = 255.0 - 510.0 * v;
    } else {
      r = 510.0 * (v - 0.5);
      g = 255.0 - 510.0 * (v - 0.5);
      b = 0.0;
    }
    out[3 * i] = Math.floor(r + 0.5);
    out[3 * i + 1] = Math.floor(g + 0.5);
    out[3 * i + 2] = Math.floor(b + 0.5);
  }
  return out;
}

/** One rendered frame: deformed positions plus verdict colors. The
 *  palette encodes the raw masked displacement against the limit, so
 *  the scale slider can never change a color. */
export function renderFrame(points: Float64Array, binding: Int32Array,
                            h: DisplacementHistory, t: number,
                            cfg: PlaybackSettings, model: FeaModel):
    { positions: Float64Array; colors: Uint8Array } {
  const positions = deformedPositions(points, binding, h, t, cfg);
  const u = sampleBound(binding, h, t);
  const [mx, my, mz] = cfg.axisMask;
  const mags = new Float64Array(binding.length);
  for (let i = 0; i < binding.length; i++) {
    const row = u.get(binding[i])!;
    const x = mx * row[0], y = my * row[1], z = mz * row[2];
    mags[i] = Math.sqrt((x * x + y * y) + z * z);
  }
  const colors = colorByDisplacement(mags, model.spanLengthIn / 1000
                                           * METERS_PER_INCH);
  return { positions, colors };
}

export interface WarningInterval {
  start: number;
  end: number;
}

export interface NodeTrace {
  nodeId: number;
  times: Float64Array;
  verticalMeters: Float64Array;
  warnings: WarningInterval[];
}

/** Vertical trace of one node with its above-limit intervals, at
 *  sample resolution; bounds lie on sample instants. */
export function trackNode(h: DisplacementHistory, nodeId: number,
                          model: FeaModel): NodeTrace {
  const series = h.samples.get(nodeId);
  if (!series) throw new Error(`node ${nodeId} not in history`);
  const limitIn = model.spanLengthIn / 1000;
  const axis = model.verticalIndex;
  const n = series.length / 3;
  const times = new Float64Array(n);
  const vertical = new Float64Array(n);
  const exceed: boolean[] = new Array(n);
  for (let k = 0; k < n; k++) {
    times[k] = k * h.dt;
    vertical[k] = series[3 * k + axis];
    exceed[k] = Math.abs(vertical[k]) / METERS_PER_INCH > limitIn;
  }
  const warnings: WarningInterval[] = [];
  let k = 0;
  while (k < n) {
    if (exceed[k]) {
      const start = k;
      while (k + 1 < n && exceed[k + 1]) k++;
      warnings.push({ start: start * h.dt, end: k * h.dt });
    }
    k++;
  }
  return { nodeId, times, verticalMeters: vertical, warnings };
}

/** True iff any tracked node exceeds the limit anywhere in the
 *  history: the warning-banner condition. */
export function anyViolation(h: DisplacementHistory, trackedNodes: number[],
                             model: FeaModel): boolean {
  return trackedNodes.some(
    (id) => trackNode(h, id, model).warnings.length > 0);
}
