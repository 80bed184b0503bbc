import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import type { SocketLike } from "../src/client";
import type { SessionState } from "../src/protocol";
import { parsePly } from "../src/ply";
import { parseHistoryCsv, parseModelJson } from "../src/formats";
import type { ViewerAssets } from "../src/viewer";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixtureBytes(name: string): Uint8Array {
  return new Uint8Array(readFileSync(join(FIXTURES, name)));
}

export function fixtureText(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

export function loadAssets(history = "history_violation.csv"): ViewerAssets {
  return {
    cloud: parsePly(fixtureBytes("cloud.ply")),
    model: parseModelJson(fixtureText("model.json")),
    history: parseHistoryCsv(fixtureText(history)),
  };
}

export async function until(
  cond: () => boolean, timeoutMs = 15000, label = "condition",
): Promise<void> {
  const t0 = Date.now();
  while (!cond()) {
    if (Date.now() - t0 > timeoutMs) {
      throw new Error(`timed out waiting for ${label}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}

export function defaultState(overrides: Partial<SessionState> = {}):
    SessionState {
  return {
    seq: 0,
    playback_time: 0,
    playing: false,
    scale: 1,
    speed: 1,
    axis_mask: [1, 1, 1],
    active_model: "tls_pointcloud",
    tracked_nodes: [],
    duration_s: 60,
    ...overrides,
  };
}

/**
 * In-memory socket pair with a scriptable server side, enough to
 * exercise the client without a network. Messages the client sends
 * land in `sent`; the test pushes server frames with `receive`.
 */
export class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.();
  }

  receive(msg: unknown): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }

  drop(): void {
    this.onclose?.();
  }

  sentJson(): unknown[] {
    return this.sent.map((s) => JSON.parse(s));
  }
}

/**
 * Socket factory that hands out FakeSockets and mimics the room
 * server: answers joins with a welcome and applies state updates by
 * bumping seq and broadcasting, so no-optimistic-apply semantics can
 * be asserted end to end.
 */
export class FakeServer {
  sockets: FakeSocket[] = [];
  state: SessionState = defaultState();
  nextUser = 1;

  factory = (): SocketLike => {
    const socket = new FakeSocket();
    const realSend = socket.send.bind(socket);
    socket.send = (data: string) => {
      realSend(data);
      this.handle(socket, JSON.parse(data));
    };
    this.sockets.push(socket);
    queueMicrotask(() => socket.open());
    return socket;
  };

  private handle(socket: FakeSocket, msg: { type: string } & Record<string, unknown>): void {
    if (msg.type === "join") {
      const id = this.nextUser++;
      socket.receive({
        type: "welcome",
        room: msg.room,
        user_id: id,
        color: [200, 120, 40],
        state: this.state,
        roster: [{ user_id: id, name: msg.name, color: [200, 120, 40] }],
      });
    } else if (msg.type === "state_update") {
      this.state = {
        ...this.state,
        ...(msg.update as Partial<SessionState>),
        seq: this.state.seq + 1,
      };
      const snapshot = this.state;
      // echo on the next tick so "no optimistic apply" is observable
      queueMicrotask(() => {
        for (const s of this.sockets) {
          if (!s.closed) {
            s.receive({ type: "state", state: snapshot, author: 1 });
          }
        }
      });
    }
  }
}
