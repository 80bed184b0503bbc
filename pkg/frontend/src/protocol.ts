/**
 * Wire protocol types for the collaboration server.
 *
 * Every frame is one JSON object with a `type` field. The server is
 * authoritative: clients send intents and render only what comes
 * back. See docs/PROTOCOL.md at the repository root for the rules.
 */

export type Vec3 = [number, number, number];

/** Flat shared session state, seq-stamped by the server. */
export interface SessionState {
  seq: number;
  playback_time: number;
  playing: boolean;
  scale: number;
  speed: number;
  axis_mask: [number, number, number];
  active_model: string;
  tracked_nodes: number[];
  duration_s: number;
}

/** Partial edit of the updatable state fields. */
export interface StateUpdate {
  playback_time?: number;
  playing?: boolean;
  scale?: number;
  speed?: number;
  axis_mask?: [number, number, number];
  active_model?: string;
  tracked_nodes?: number[];
  duration_s?: number;
}

export interface RosterEntry {
  user_id: number;
  name: string;
  color: [number, number, number];
}

export type ErrorCode =
  | "room_full"
  | "not_a_member"
  | "invalid_field"
  | "out_of_order_batch"
  | "malformed";

/* ------------------------------------------------- client -> server */

export interface JoinMsg {
  type: "join";
  room: string;
  name: string;
}

export interface StateUpdateMsg {
  type: "state_update";
  update: StateUpdate;
}

export interface PointerMsg {
  type: "pointer";
  origin: Vec3;
  direction: Vec3;
}

export interface ScanBatchMsg {
  type: "scan_batch";
  batch_seq: number;
  points: Vec3[];
}

export interface LeaveMsg {
  type: "leave";
}

export interface HeartbeatMsg {
  type: "heartbeat";
}

export type ClientMsg =
  | JoinMsg
  | StateUpdateMsg
  | PointerMsg
  | ScanBatchMsg
  | LeaveMsg
  | HeartbeatMsg;

/* ------------------------------------------------- server -> client */

export interface WelcomeMsg {
  type: "welcome";
  room: string;
  user_id: number;
  color: [number, number, number];
  state: SessionState;
  roster: RosterEntry[];
}

export interface RosterMsg {
  type: "roster";
  users: RosterEntry[];
}

export interface StateMsg {
  type: "state";
  state: SessionState;
}

export interface PointerRelayMsg {
  type: "pointer";
  user_id: number;
  origin: Vec3;
  direction: Vec3;
}

export interface ScanBatchRelayMsg {
  type: "scan_batch";
  publisher: number;
  batch_seq: number;
  points: Vec3[];
}

export interface ErrorMsg {
  type: "error";
  code: ErrorCode;
  message: string;
}

export type ServerMsg =
  | WelcomeMsg
  | RosterMsg
  | StateMsg
  | PointerRelayMsg
  | ScanBatchRelayMsg
  | HeartbeatMsg
  | ErrorMsg;

/** Parse one wire frame; null for anything that is not a known shape. */
export function parseServerMsg(raw: string): ServerMsg | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const type = (doc as { type?: unknown }).type;
  if (typeof type !== "string") return null;
  switch (type) {
    case "welcome":
    case "roster":
    case "state":
    case "pointer":
    case "scan_batch":
    case "heartbeat":
    case "error":
      return doc as ServerMsg;
    default:
      return null;
  }
}
