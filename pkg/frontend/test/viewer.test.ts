import { describe, expect, it } from "vitest";
import {
  ViewerSession,
  type RemotePointer,
  type ViewerEvents,
} from "../src/viewer";
import type { SessionState } from "../src/protocol";
import { FakeServer, loadAssets, until } from "./helpers";

function makeViewer(server: FakeServer, events: ViewerEvents = {}) {
  const session = new ViewerSession(
    "ws://x", "deck", "ana", loadAssets(), events,
    { socketFactory: server.factory, heartbeatMs: 0,
      reconnectDelayMs: 20 });
  session.connect();
  return session;
}

describe("ViewerSession", () => {
  it("renders only what the server has confirmed", async () => {
    const server = new FakeServer();
    const session = makeViewer(server);
    await until(() => session.phase === "joined");

    const before = session.frameAt(1.5, 1, [1, 1, 1]);
    session.setScale(250);

    // the edit is in flight: the mirrored state and thus the frame
    // are untouched until the server echo lands
    expect(session.state!.scale).toBe(1);
    const mid = session.frameAt(
      1.5, session.state!.scale, session.state!.axis_mask);
    expect(mid.positions[2]).toBe(before.positions[2]);

    await until(() => session.state!.scale === 250);
    const after = session.frameAt(
      1.5, session.state!.scale, session.state!.axis_mask);
    expect(session.state!.seq).toBe(1);
    expect(after.positions[2]).not.toBe(before.positions[2]);
    session.close();
  });

  it("computes the frame from state plus the local clock", async () => {
    const server = new FakeServer();
    let wall = 0;
    const session = new ViewerSession(
      "ws://x", "deck", "ana", loadAssets(), {},
      { socketFactory: server.factory, heartbeatMs: 0, now: () => wall });
    session.connect();
    await until(() => session.phase === "joined");

    session.setPlaying(true);
    await until(() => session.state!.playing);

    const t0 = session.currentTime();
    wall += 500;
    const t1 = session.currentTime();
    expect(t1 - t0).toBeCloseTo(0.5, 9);

    const frame = session.frame();
    expect(frame).not.toBeNull();
    expect(frame!.time).toBeCloseTo(t1, 9);
    session.close();
  });

  it("raises the warning banner exactly when a tracked node violates", async () => {
    const server = new FakeServer();
    const session = makeViewer(server);
    await until(() => session.phase === "joined");

    expect(session.warningActive()).toBe(false);
    session.setTrackedNodes([1, 3]);
    await until(() => session.state!.tracked_nodes.length === 2);
    expect(session.warningActive()).toBe(false);

    session.setTrackedNodes([2]);
    await until(() => session.state!.tracked_nodes.length === 1);
    expect(session.warningActive()).toBe(true);
    session.close();
  });

  it("accumulates scan batches and keys pointers to the roster", async () => {
    const server = new FakeServer();
    const added: number[] = [];
    let pointers: RemotePointer[] = [];
    const session = makeViewer(server, {
      scanPointsAdded: (flat: Float64Array) => added.push(flat.length),
      pointersChanged: (p: RemotePointer[]) => { pointers = p; },
    });
    await until(() => session.phase === "joined");

    const socket = server.sockets[0];
    socket.receive({
      type: "scan_batch", publisher: 9, batch_seq: 1,
      points: [[1, 2, 3], [4, 5, 6]],
    });
    socket.receive({
      type: "scan_batch", publisher: 9, batch_seq: 2, points: [[7, 8, 9]],
    });
    expect(added).toEqual([6, 3]);
    expect([...session.scannedPoints]).toEqual(
      [1, 2, 3, 4, 5, 6, 7, 8, 9]);

    socket.receive({
      type: "roster",
      users: [
        { user_id: 1, name: "ana", color: [200, 120, 40] },
        { user_id: 9, name: "scanner", color: [5, 6, 7] },
      ],
    });
    socket.receive({
      type: "pointer", user_id: 9, origin: [0, 1, 0], direction: [0, 0, 1],
    });
    expect(pointers.length).toBe(1);
    expect(pointers[0].name).toBe("scanner");
    expect(pointers[0].color).toEqual([5, 6, 7]);

    // the ray disappears with its owner
    socket.receive({
      type: "roster",
      users: [{ user_id: 1, name: "ana", color: [200, 120, 40] }],
    });
    expect(pointers.length).toBe(0);
    session.close();
  });

  it("switches clouds only when the server confirms the model", async () => {
    const server = new FakeServer();
    const assets = loadAssets();
    const overlay = {
      count: 2,
      points: new Float64Array([0, 0, 0, 3.2512, 0, 0]),
      colors: null,
    };
    const session = new ViewerSession(
      "ws://x", "deck", "ana",
      { ...assets, clouds: { tls_pointcloud: assets.cloud,
                             fea_overlay: overlay } },
      {}, { socketFactory: server.factory, heartbeatMs: 0 });
    session.connect();
    await until(() => session.phase === "joined");

    expect(session.availableModels())
      .toEqual(["tls_pointcloud", "fea_overlay"]);
    expect(session.activeCloud()).toBe(assets.cloud);

    session.setActiveModel("fea_overlay");
    expect(session.activeCloud()).toBe(assets.cloud); // echo not in yet
    await until(() => session.state!.active_model === "fea_overlay");
    expect(session.activeCloud()).toBe(overlay);
    expect(session.frame()!.positions.length).toBe(6);

    // an unknown name falls back to the default cloud
    session.setActiveModel("uav_pointcloud");
    await until(() => session.state!.active_model === "uav_pointcloud");
    expect(session.activeCloud()).toBe(assets.cloud);
    session.close();
  });

  it("reloads the scene from the welcome snapshot on rejoin", async () => {
    const server = new FakeServer();
    const states: number[] = [];
    const session = makeViewer(server, {
      stateChanged: (s: SessionState) => states.push(s.seq),
    });
    await until(() => session.phase === "joined");

    session.setScale(40);
    await until(() => session.state!.seq === 1);

    server.sockets[0].drop();
    expect(session.phase).toBe("reconnecting");
    await until(() => session.phase === "joined", 5000, "rejoin");
    // the replayed snapshot carries the post-edit state
    expect(session.state!.scale).toBe(40);
    expect(states.at(-1)).toBe(1);
    session.close();
  });
});
