import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import {
  RoomClient,
  type RoomClientEvents,
  type RoomClientOptions,
} from "../src/client";
import type { SessionState } from "../src/protocol";
import { FakeSocket, defaultState } from "./helpers";

function welcome(state: SessionState, userId = 1) {
  return {
    type: "welcome",
    room: "deck",
    user_id: userId,
    color: [10, 20, 30],
    state,
    roster: [{ user_id: userId, name: "ana", color: [10, 20, 30] }],
  };
}

describe("RoomClient", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  function connected(events: RoomClientEvents = {},
                     opts: Partial<RoomClientOptions> = {}) {
    const sockets: FakeSocket[] = [];
    const client = new RoomClient("ws://x", "deck", "ana", events, {
      socketFactory: () => {
        const s = new FakeSocket();
        sockets.push(s);
        return s;
      },
      reconnectDelayMs: 100,
      heartbeatMs: 0,
      ...opts,
    });
    client.connect();
    sockets[0].open();
    return { client, sockets };
  }

  it("sends a join as soon as the socket opens", () => {
    const { sockets } = connected();
    expect(sockets[0].sentJson()).toEqual([
      { type: "join", room: "deck", name: "ana" },
    ]);
  });

  it("mirrors the welcome snapshot", () => {
    const { client, sockets } = connected();
    const state = defaultState({ seq: 7, scale: 40 });
    sockets[0].receive(welcome(state, 3));
    expect(client.phase).toBe("joined");
    expect(client.userId).toBe(3);
    expect(client.color).toEqual([10, 20, 30]);
    expect(client.state).toEqual(state);
    expect(client.roster.length).toBe(1);
  });

  it("never applies its own update optimistically", () => {
    const { client, sockets } = connected();
    sockets[0].receive(welcome(defaultState()));
    client.sendUpdate({ scale: 99 });
    // the edit went out on the wire...
    expect(sockets[0].sentJson().at(-1)).toEqual(
      { type: "state_update", update: { scale: 99 } });
    // ...but the mirrored state still shows the last broadcast
    expect(client.state!.scale).toBe(1);
    const next = defaultState({ seq: 1, scale: 99 });
    sockets[0].receive({ type: "state", state: next, author: 1 });
    expect(client.state!.scale).toBe(99);
  });

  it("stamps state arrivals with the injected clock", () => {
    let t = 5000;
    const { client, sockets } = connected({}, { now: () => t });
    sockets[0].receive(welcome(defaultState()));
    expect(client.stateReceivedAt).toBe(5000);
    t = 6250;
    sockets[0].receive(
      { type: "state", state: defaultState({ seq: 1 }), author: 1 });
    expect(client.stateReceivedAt).toBe(6250);
  });

  it("drops unparseable frames without dying", () => {
    const { client, sockets } = connected();
    sockets[0].receive(welcome(defaultState()));
    sockets[0].onmessage?.({ data: "not json{{" });
    sockets[0].onmessage?.({ data: JSON.stringify({ type: "mystery" }) });
    expect(client.phase).toBe("joined");
  });

  it("decodes binary frames", () => {
    const { client, sockets } = connected();
    const bytes = new TextEncoder().encode(
      JSON.stringify(welcome(defaultState())));
    sockets[0].onmessage?.({ data: bytes });
    expect(client.phase).toBe("joined");
  });

  it("rejoins by itself after a drop and reports the replay", () => {
    const phases: string[] = [];
    const welcomes: boolean[] = [];
    const { client, sockets } = connected({
      phase: (p: string) => phases.push(p),
      welcome: (_s: SessionState, replayed: boolean) =>
        welcomes.push(replayed),
    });
    sockets[0].receive(welcome(defaultState()));
    sockets[0].drop();
    expect(client.phase).toBe("reconnecting");

    vi.advanceTimersByTime(100);
    expect(sockets.length).toBe(2);
    sockets[1].open();
    expect(sockets[1].sentJson()[0]).toEqual(
      { type: "join", room: "deck", name: "ana" });
    sockets[1].receive(welcome(defaultState({ seq: 4 }), 2));
    expect(client.phase).toBe("joined");
    expect(client.state!.seq).toBe(4);
    expect(welcomes).toEqual([false, true]);
    expect(phases).toContain("reconnecting");
  });

  it("takes a room_full refusal as final", () => {
    const errors: string[] = [];
    const { client, sockets } = connected({
      serverError: (msg: { code: string }) => errors.push(msg.code),
    });
    sockets[0].receive(
      { type: "error", code: "room_full", message: "room is full" });
    expect(client.phase).toBe("rejected");
    expect(client.rejectionCode).toBe("room_full");
    sockets[0].drop();
    vi.advanceTimersByTime(10_000);
    expect(sockets.length).toBe(1);
    expect(errors).toEqual(["room_full"]);
  });

  it("keeps retrying after drops that happen before any welcome", () => {
    const { sockets } = connected();
    sockets[0].drop();
    vi.advanceTimersByTime(100);
    expect(sockets.length).toBe(2);
    sockets[1].open();
    sockets[1].receive(welcome(defaultState()));
  });

  it("sends heartbeats on the configured cadence", () => {
    const { sockets } = connected({}, { heartbeatMs: 50 });
    sockets[0].receive(welcome(defaultState()));
    vi.advanceTimersByTime(175);
    const beats = sockets[0].sentJson()
      .filter((m) => (m as { type: string }).type === "heartbeat");
    expect(beats.length).toBe(3);
  });

  it("stops timers and sockets on close", () => {
    const { client, sockets } = connected();
    sockets[0].receive(welcome(defaultState()));
    client.close();
    expect(client.phase).toBe("closed");
    expect(sockets[0].closed).toBe(true);
    vi.advanceTimersByTime(10_000);
    expect(sockets.length).toBe(1);
  });

  it("relays pointers and scan batches to its events", () => {
    const pointers: number[] = [];
    const batches: number[] = [];
    const { sockets } = connected({
      pointer: (msg: { user_id: number }) => pointers.push(msg.user_id),
      scanBatch: (msg: { batch_seq: number }) => batches.push(msg.batch_seq),
    });
    sockets[0].receive(welcome(defaultState()));
    sockets[0].receive({
      type: "pointer", user_id: 9, origin: [0, 0, 0], direction: [1, 0, 0],
    });
    sockets[0].receive({
      type: "scan_batch", publisher: 9, batch_seq: 2, points: [[1, 2, 3]],
    });
    expect(pointers).toEqual([9]);
    expect(batches).toEqual([2]);
  });
});
