/**
 * Parsers for the engine's file formats: FEA model JSON, displacement
 * history CSV, modal set JSON, and the verb reports. Formats are
 * documented in docs/FORMATS.md at the repository root; parsing here
 * applies the same validation the engine does, so a file both sides
 * accept means the same thing to both.
 */

export type VerticalAxis = "x" | "y" | "z";

const AXIS_INDEX: Record<VerticalAxis, number> = { x: 0, y: 1, z: 2 };

export interface FeaModel {
  /** Node ids sorted ascending; positions aligned to this order. */
  nodeIds: Int32Array;
  positions: Float64Array; // 3 per node, meters
  spanLengthIn: number;
  verticalAxis: VerticalAxis;
  verticalIndex: number;
  midspanNodes: number[];
}

export function parseModelJson(text: string): FeaModel {
  const doc = JSON.parse(text) as {
    span_length_in: number;
    vertical_axis: string;
    midspan_nodes: number[];
    nodes: { id: number; x: number; y: number; z: number }[];
  };
  if (!(doc.span_length_in > 0)) throw new Error("span must be positive");
  if (!["x", "y", "z"].includes(doc.vertical_axis)) {
    throw new Error(`bad vertical axis ${doc.vertical_axis}`);
  }
  if (!Array.isArray(doc.nodes) || doc.nodes.length === 0) {
    throw new Error("model has no nodes");
  }
  const nodes = [...doc.nodes].sort((a, b) => a.id - b.id);
  const nodeIds = new Int32Array(nodes.length);
  const positions = new Float64Array(nodes.length * 3);
  nodes.forEach((nd, i) => {
    nodeIds[i] = nd.id;
    positions[3 * i] = nd.x;
    positions[3 * i + 1] = nd.y;
    positions[3 * i + 2] = nd.z;
  });
  for (let i = 1; i < nodeIds.length; i++) {
    if (nodeIds[i] === nodeIds[i - 1]) throw new Error("duplicate node id");
  }
  const idSet = new Set(Array.from(nodeIds));
  for (const m of doc.midspan_nodes) {
    if (!idSet.has(m)) throw new Error(`midspan node ${m} not in model`);
  }
  const axis = doc.vertical_axis as VerticalAxis;
  return {
    nodeIds,
    positions,
    spanLengthIn: doc.span_length_in,
    verticalAxis: axis,
    verticalIndex: AXIS_INDEX[axis],
    midspanNodes: [...doc.midspan_nodes],
  };
}

export interface DisplacementHistory {
  dt: number;
  duration: number;
  /** Per node: flat [ux, uy, uz] * nSamples, meters. */
  samples: Map<number, Float64Array>;
  nSamples: number;
}

export function parseHistoryCsv(text: string): DisplacementHistory {
  const lines = text.split("\n").filter((ln) => ln.trim().length > 0);
  if (lines.length === 0 || lines[0].trim() !== "time,node_id,ux,uy,uz") {
    throw new Error("history header must be 'time,node_id,ux,uy,uz'");
  }
  const times: number[] = [];
  const perNode = new Map<number, { t: number; u: number[] }[]>();
  for (let li = 1; li < lines.length; li++) {
    const cells = lines[li].split(",");
    if (cells.length !== 5) throw new Error("history rows need 5 columns");
    const t = Number(cells[0]);
    const nodeId = Number(cells[1]);
    const u = [Number(cells[2]), Number(cells[3]), Number(cells[4])];
    if ([t, nodeId, ...u].some((v) => Number.isNaN(v))) {
      throw new Error(`unparseable history row: ${lines[li]}`);
    }
    if (times.length === 0 || t !== times[times.length - 1]) times.push(t);
    let rows = perNode.get(nodeId);
    if (!rows) {
      rows = [];
      perNode.set(nodeId, rows);
    }
    rows.push({ t, u });
  }
  if (times.length < 2) throw new Error("history needs at least 2 steps");
  if (times[0] !== 0) throw new Error("history must start at time 0");
  const dt = times[1] - times[0];
  for (let k = 1; k < times.length; k++) {
    const step = times[k] - times[k - 1];
    if (step <= 0) throw new Error("time must be strictly increasing");
    if (Math.abs(step - dt) > 1e-6 * dt) {
      throw new Error("time steps deviate from uniform spacing");
    }
  }
  const samples = new Map<number, Float64Array>();
  for (const [nodeId, rows] of perNode) {
    if (rows.length !== times.length) {
      throw new Error(`node ${nodeId} missing from some time steps`);
    }
    const flat = new Float64Array(rows.length * 3);
    rows.forEach((row, k) => {
      if (row.t !== times[k]) {
        throw new Error(`node ${nodeId} rows out of time order`);
      }
      flat[3 * k] = row.u[0];
      flat[3 * k + 1] = row.u[1];
      flat[3 * k + 2] = row.u[2];
    });
    samples.set(nodeId, flat);
  }
  return { dt, duration: times[times.length - 1], samples,
           nSamples: times.length };
}

/* ----------------------------------------------------- modal reports */

export interface ModeEntry {
  frequencyHz: number;
  dampingRatio: number;
  shapeRe: number[];
  shapeIm: number[];
}

export interface ModalSet {
  source: "oma" | "fea";
  modes: ModeEntry[];
}

export function parseModalSetJson(text: string): ModalSet {
  const doc = JSON.parse(text) as {
    source: "oma" | "fea";
    modes: { frequency_hz: number; damping_ratio: number;
             shape_re: number[]; shape_im: number[] }[];
  };
  return {
    source: doc.source,
    modes: doc.modes.map((m) => ({
      frequencyHz: m.frequency_hz,
      dampingRatio: m.damping_ratio,
      shapeRe: m.shape_re,
      shapeIm: m.shape_im,
    })),
  };
}

export interface MatchedPair {
  omaFrequencyHz: number;
  feaFrequencyHz: number;
  omaDampingRatio: number;
  feaDampingRatio: number;
  mac: number;
  freqDiffRel: number;
}

export interface MatchReport {
  pairs: MatchedPair[];
  unmatchedOma: number[];
  unmatchedFea: number[];
}

export function parseMatchReportJson(text: string): MatchReport {
  const doc = JSON.parse(text) as {
    report: string;
    pairs: { oma_frequency_hz: number; fea_frequency_hz: number;
             oma_damping_ratio: number; fea_damping_ratio: number;
             mac: number; freq_diff_rel: number }[];
    unmatched_oma: number[];
    unmatched_fea: number[];
  };
  if (doc.report !== "mode_match") {
    throw new Error(`not a mode_match report: ${doc.report}`);
  }
  return {
    pairs: doc.pairs.map((p) => ({
      omaFrequencyHz: p.oma_frequency_hz,
      feaFrequencyHz: p.fea_frequency_hz,
      omaDampingRatio: p.oma_damping_ratio,
      feaDampingRatio: p.fea_damping_ratio,
      mac: p.mac,
      freqDiffRel: p.freq_diff_rel,
    })),
    unmatchedOma: doc.unmatched_oma,
    unmatchedFea: doc.unmatched_fea,
  };
}

export interface CheckReport {
  spanLengthIn: number;
  limitIn: number;
  nodes: { nodeId: number; peakIn: number; tPeak: number;
           violated: boolean }[];
  violations: number[];
}

export function parseCheckReportJson(text: string): CheckReport {
  const doc = JSON.parse(text) as {
    report: string;
    span_length_in: number;
    limit_in: number;
    nodes: { node_id: number; peak_in: number; t_peak: number;
             violated: boolean }[];
    violations: number[];
  };
  if (doc.report !== "serviceability") {
    throw new Error(`not a serviceability report: ${doc.report}`);
  }
  return {
    spanLengthIn: doc.span_length_in,
    limitIn: doc.limit_in,
    nodes: doc.nodes.map((n) => ({
      nodeId: n.node_id,
      peakIn: n.peak_in,
      tPeak: n.t_peak,
      violated: n.violated,
    })),
    violations: doc.violations,
  };
}
