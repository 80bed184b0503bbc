/**
 * Room client: joins a session, mirrors the authoritative state, and
 * rejoins on its own after a dropped connection.
 *
 * The client never applies a local edit to shared state; it sends the
 * update and waits for the server's `state` broadcast like everyone
 * else. Consumers read `state` (plus its arrival timestamp for clock
 * extrapolation) and subscribe to events.
 */

import {
  ClientMsg,
  ErrorMsg,
  PointerRelayMsg,
  RosterEntry,
  ScanBatchRelayMsg,
  SessionState,
  StateUpdate,
  Vec3,
  parseServerMsg,
} from "./protocol";

/** The subset of WebSocket the client needs; `ws` and the browser
 *  implementation both satisfy it. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionPhase =
  | "connecting"
  | "joined"
  | "reconnecting"
  | "rejected"
  | "closed";

export interface RoomClientEvents {
  state?: (state: SessionState) => void;
  roster?: (users: RosterEntry[]) => void;
  pointer?: (msg: PointerRelayMsg) => void;
  scanBatch?: (msg: ScanBatchRelayMsg) => void;
  serverError?: (msg: ErrorMsg) => void;
  phase?: (phase: ConnectionPhase) => void;
  /** Fired on each welcome: the snapshot to (re)build the scene from. */
  welcome?: (state: SessionState, replayed: boolean) => void;
}

export interface RoomClientOptions {
  /** Socket constructor; defaults to the browser WebSocket. */
  socketFactory?: SocketFactory;
  /** Delay before a reconnect attempt, ms. */
  reconnectDelayMs?: number;
  /** Heartbeat cadence, ms; 0 disables. */
  heartbeatMs?: number;
  now?: () => number;
}

const defaultFactory: SocketFactory = (url) =>
  new WebSocket(url) as unknown as SocketLike;

export class RoomClient {
  readonly url: string;
  readonly room: string;
  readonly name: string;

  userId: number | null = null;
  color: [number, number, number] | null = null;
  state: SessionState | null = null;
  /** now() timestamp at which `state` arrived, for extrapolation. */
  stateReceivedAt = 0;
  roster: RosterEntry[] = [];
  phase: ConnectionPhase = "connecting";
  rejectionCode: string | null = null;

  private events: RoomClientEvents;
  private factory: SocketFactory;
  private socket: SocketLike | null = null;
  private reconnectDelayMs: number;
  private heartbeatMs: number;
  private heartbeatTimer: ReturnType<typeof setInterval> | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  private everJoined = false;
  private now: () => number;

  constructor(url: string, room: string, name: string,
              events: RoomClientEvents = {}, opts: RoomClientOptions = {}) {
    this.url = url;
    this.room = room;
    this.name = name;
    this.events = events;
    this.factory = opts.socketFactory ?? defaultFactory;
    this.reconnectDelayMs = opts.reconnectDelayMs ?? 1000;
    this.heartbeatMs = opts.heartbeatMs ?? 4000;
    this.now = opts.now ?? (() => Date.now());
  }

  connect(): void {
    this.stopped = false;
    this.openSocket();
  }

  close(): void {
    this.stopped = true;
    this.clearTimers();
    if (this.socket) {
      const s = this.socket;
      this.socket = null;
      s.onclose = null;
      s.close();
    }
    this.setPhase("closed");
  }

  /* ------------------------------------------------------- sending */

  sendUpdate(update: StateUpdate): void {
    this.sendMsg({ type: "state_update", update });
  }

  sendPointer(origin: Vec3, direction: Vec3): void {
    this.sendMsg({ type: "pointer", origin, direction });
  }

  sendScanBatch(batchSeq: number, points: Vec3[]): void {
    this.sendMsg({ type: "scan_batch", batch_seq: batchSeq, points });
  }

  leave(): void {
    this.sendMsg({ type: "leave" });
    this.close();
  }

  private sendMsg(msg: ClientMsg): void {
    if (this.socket && this.phase === "joined") {
      this.socket.send(JSON.stringify(msg));
    }
  }

  /* ---------------------------------------------------- connection */

  private openSocket(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      socket.send(JSON.stringify({
        type: "join", room: this.room, name: this.name,
      } satisfies ClientMsg));
    };
    socket.onmessage = (ev) => {
      if (typeof ev.data === "string") this.handleFrame(ev.data);
      else if (ev.data instanceof Uint8Array) {
        // node's ws delivers Buffers, which are Uint8Arrays
        this.handleFrame(new TextDecoder().decode(ev.data));
      }
    };
    socket.onclose = () => this.handleDrop();
    socket.onerror = () => { /* onclose follows */ };
  }

  private handleDrop(): void {
    this.clearTimers();
    this.socket = null;
    if (this.stopped || this.phase === "rejected") return;
    // connection loss after a successful join: show the banner state
    // and rejoin by ourselves; the welcome snapshot reloads the scene
    this.setPhase("reconnecting");
    this.reconnectTimer = setTimeout(
      () => this.openSocket(), this.reconnectDelayMs);
  }

  private clearTimers(): void {
    if (this.heartbeatTimer !== null) {
      clearInterval(this.heartbeatTimer);
      this.heartbeatTimer = null;
    }
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
  }

  private setPhase(phase: ConnectionPhase): void {
    if (this.phase !== phase) {
      this.phase = phase;
      this.events.phase?.(phase);
    }
  }

  /* ------------------------------------------------------ receiving */

  private handleFrame(raw: string): void {
    const msg = parseServerMsg(raw);
    if (!msg) return;
    switch (msg.type) {
      case "welcome": {
        this.userId = msg.user_id;
        this.color = msg.color;
        this.state = msg.state;
        this.stateReceivedAt = this.now();
        this.roster = msg.roster;
        this.setPhase("joined");
        if (this.heartbeatMs > 0) {
          this.heartbeatTimer = setInterval(
            () => this.sendMsg({ type: "heartbeat" }), this.heartbeatMs);
        }
        this.events.welcome?.(msg.state, this.everJoined);
        this.everJoined = true;
        this.events.state?.(msg.state);
        this.events.roster?.(msg.roster);
        break;
      }
      case "state":
        this.state = msg.state;
        this.stateReceivedAt = this.now();
        this.events.state?.(msg.state);
        break;
      case "roster":
        this.roster = msg.users;
        this.events.roster?.(msg.users);
        break;
      case "pointer":
        this.events.pointer?.(msg);
        break;
      case "scan_batch":
        this.events.scanBatch?.(msg);
        break;
      case "error":
        if (this.phase !== "joined" && msg.code === "room_full") {
          // the join itself was refused; do not hammer the server
          this.rejectionCode = msg.code;
          this.setPhase("rejected");
        }
        this.events.serverError?.(msg);
        break;
      case "heartbeat":
        break;
    }
  }
}
