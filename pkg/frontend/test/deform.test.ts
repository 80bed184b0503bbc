import { describe, expect, it } from "vitest";
import {
  METERS_PER_INCH,
  anyViolation,
  bindPoints,
  colorByDisplacement,
  deformedPositions,
  renderFrame,
  sampleDisplacement,
  trackNode,
} from "../src/deform";
import { parseCheckReportJson } from "../src/formats";
import { parsePly } from "../src/ply";
import { fixtureBytes, fixtureText, loadAssets } from "./helpers";

const assets = loadAssets("history_violation.csv");
const binding = bindPoints(assets.cloud.points, assets.model);

describe("bindPoints", () => {
  it("matches the engine's binding report node for node", () => {
    const golden = JSON.parse(fixtureText("binding.json")) as {
      points: number; node_ids: number[];
    };
    expect(binding.length).toBe(golden.points);
    expect([...binding]).toEqual(golden.node_ids);
  });
});

describe("sampleDisplacement", () => {
  it("returns stored samples exactly at grid instants", () => {
    const node2 = assets.history.samples.get(2)!;
    for (const k of [0, 3, 6, 8]) {
      const u = sampleDisplacement(assets.history, 2, k * 0.25);
      expect(u[0]).toBe(node2[3 * k]);
      expect(u[1]).toBe(node2[3 * k + 1]);
      expect(u[2]).toBe(node2[3 * k + 2]);
    }
  });

  it("interpolates linearly between instants", () => {
    const node2 = assets.history.samples.get(2)!;
    const u = sampleDisplacement(assets.history, 2, 0.375);
    expect(u[2]).toBe(0.5 * node2[1 * 3 + 2] + 0.5 * node2[2 * 3 + 2]);
  });

  it("rejects times outside the recording", () => {
    expect(() => sampleDisplacement(assets.history, 2, -0.1)).toThrow();
    expect(() => sampleDisplacement(assets.history, 2, 2.1)).toThrow();
  });
});

describe("renderFrame against the engine's exported frame", () => {
  it("reproduces positions bit for bit and colors byte for byte", () => {
    const golden = parsePly(fixtureBytes("frame.ply"));
    const { positions, colors } = renderFrame(
      assets.cloud.points, binding, assets.history, 1.5,
      { scale: 10, axisMask: [0, 0, 1] }, assets.model);
    expect(positions.length).toBe(golden.points.length);
    for (let i = 0; i < positions.length; i++) {
      expect(positions[i]).toBe(golden.points[i]);
    }
    expect(golden.colors).not.toBeNull();
    expect([...colors]).toEqual([...golden.colors!]);
  });

  it("collapses to the undeformed cloud at scale zero", () => {
    const { positions } = renderFrame(
      assets.cloud.points, binding, assets.history, 1.5,
      { scale: 0, axisMask: [1, 1, 1] }, assets.model);
    for (let i = 0; i < positions.length; i++) {
      expect(positions[i]).toBe(assets.cloud.points[i]);
    }
  });

  it("moves only along unmasked axes", () => {
    const { positions } = renderFrame(
      assets.cloud.points, binding, assets.history, 1.5,
      { scale: 10, axisMask: [1, 0, 0] }, assets.model);
    for (let i = 0; i < positions.length / 3; i++) {
      expect(positions[3 * i + 1]).toBe(assets.cloud.points[3 * i + 1]);
      expect(positions[3 * i + 2]).toBe(assets.cloud.points[3 * i + 2]);
    }
    // axial motion survives the mask
    expect(positions[0]).not.toBe(assets.cloud.points[0]);
  });

  it("scales displacement linearly", () => {
    const p1 = deformedPositions(
      assets.cloud.points, binding, assets.history, 1.5,
      { scale: 1, axisMask: [1, 1, 1] });
    const p3 = deformedPositions(
      assets.cloud.points, binding, assets.history, 1.5,
      { scale: 3, axisMask: [1, 1, 1] });
    for (let i = 0; i < p1.length; i++) {
      const d1 = p1[i] - assets.cloud.points[i];
      const d3 = p3[i] - assets.cloud.points[i];
      expect(d3).toBeCloseTo(3 * d1, 12);
    }
  });
});

describe("colorByDisplacement", () => {
  it("hits the documented endpoints and midpoint", () => {
    const limit = 0.01;
    const colors = colorByDisplacement(
      new Float64Array([0, limit / 2, limit, 2 * limit]), limit);
    expect([...colors.subarray(0, 3)]).toEqual([0, 0, 255]);
    expect([...colors.subarray(3, 6)]).toEqual([0, 255, 0]);
    expect([...colors.subarray(6, 9)]).toEqual([255, 0, 0]);
    expect([...colors.subarray(9, 12)]).toEqual([255, 0, 0]);
  });

  it("hits the quarter points", () => {
    const colors = colorByDisplacement(new Float64Array([0.25, 0.75]), 1);
    expect([...colors.subarray(0, 3)]).toEqual([0, 128, 128]);
    expect([...colors.subarray(3, 6)]).toEqual([128, 128, 0]);
  });

  it("ramps the red channel monotonically", () => {
    const n = 101;
    const mags = new Float64Array(n);
    for (let i = 0; i < n; i++) mags[i] = i / (n - 1);
    const colors = colorByDisplacement(mags, 1);
    for (let i = 1; i < n; i++) {
      expect(colors[3 * i]).toBeGreaterThanOrEqual(colors[3 * (i - 1)]);
      expect(colors[3 * i + 2]).toBeLessThanOrEqual(colors[3 * (i - 1) + 2]);
    }
  });

  it("uses magnitudes, not signed values", () => {
    const colors = colorByDisplacement(new Float64Array([-1]), 1);
    expect([...colors.subarray(0, 3)]).toEqual([255, 0, 0]);
  });

  it("rejects a non-positive limit", () => {
    expect(() => colorByDisplacement(new Float64Array([0]), 0)).toThrow();
  });
});

describe("trackNode against the engine's traces", () => {
  const golden = JSON.parse(fixtureText("traces_violation.json")) as Record<
    string, { times: number[]; vertical: number[]; warnings: number[][] }>;

  it("reproduces times, vertical series, and warning intervals", () => {
    for (const nodeId of [1, 2, 3]) {
      const trace = trackNode(assets.history, nodeId, assets.model);
      const want = golden[String(nodeId)];
      expect([...trace.times]).toEqual(want.times);
      for (let i = 0; i < want.vertical.length; i++) {
        expect(trace.verticalMeters[i]).toBe(want.vertical[i]);
      }
      expect(trace.warnings.map((w) => [w.start, w.end]))
        .toEqual(want.warnings);
    }
  });

  it("flags only the midspan node", () => {
    expect(trackNode(assets.history, 2, assets.model).warnings.length)
      .toBeGreaterThan(0);
    expect(trackNode(assets.history, 1, assets.model).warnings).toEqual([]);
    expect(trackNode(assets.history, 3, assets.model).warnings).toEqual([]);
  });
});

describe("warning verdict parity with the engine", () => {
  it("agrees with the violation verdict", () => {
    const verdict = parseCheckReportJson(fixtureText("verdict_violation.json"));
    expect(verdict.violations).toEqual([2]);
    expect(anyViolation(assets.history, [2], assets.model)).toBe(true);
    expect(anyViolation(assets.history, [1, 3], assets.model)).toBe(false);
    expect(anyViolation(assets.history, [1, 2, 3], assets.model)).toBe(true);
  });

  it("agrees with the clean verdict", () => {
    const clean = loadAssets("history_clean.csv");
    const verdict = parseCheckReportJson(fixtureText("verdict_clean.json"));
    expect(verdict.violations).toEqual([]);
    expect(anyViolation(clean.history, [1, 2, 3], clean.model)).toBe(false);
  });

  it("derives the same span limit the verdict reports", () => {
    const verdict = parseCheckReportJson(fixtureText("verdict_violation.json"));
    expect(assets.model.spanLengthIn / 1000).toBe(verdict.limitIn);
    expect(0.128 * METERS_PER_INCH).toBe(0.0032512);
  });
});
