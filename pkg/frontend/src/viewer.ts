/**
 * Headless viewer session: owns the room connection, the loaded
 * assets, and the mapping from (authoritative state, wall clock) to
 * a renderable frame. The DOM and three.js layers only read from
 * this object and forward edits back through sendUpdate. Local edits
 * are never applied to the rendered state directly -- the frame
 * always derives from the last state the server broadcast plus clock
 * extrapolation, so every participant sees the same animation.
 */

import {
  RoomClient,
  type ConnectionPhase,
  type RoomClientEvents,
  type RoomClientOptions,
} from "./client";
import type {
  ErrorMsg,
  RosterEntry,
  SessionState,
  StateUpdate,
  Vec3,
} from "./protocol";
import { playbackTime } from "./clock";
import {
  anyViolation,
  bindPoints,
  renderFrame,
  sampleDisplacement,
  trackNode,
  type NodeTrace,
} from "./deform";
import type { DisplacementHistory, FeaModel } from "./formats";
import type { ParsedCloud } from "./ply";

export interface ViewerAssets {
  /** Cloud shown when the shared active_model has no match below. */
  cloud: ParsedCloud;
  /** Switchable clouds keyed by active_model name (optional). */
  clouds?: Record<string, ParsedCloud>;
  model: FeaModel;
  history: DisplacementHistory;
}

export interface Frame {
  time: number;
  positions: Float64Array;
  colors: Uint8Array;
}

export interface RemotePointer {
  userId: number;
  name: string;
  color: [number, number, number];
  origin: Vec3;
  direction: Vec3;
}

export interface ViewerEvents {
  stateChanged?: (state: SessionState) => void;
  rosterChanged?: (roster: RosterEntry[]) => void;
  pointersChanged?: (pointers: RemotePointer[]) => void;
  scanPointsAdded?: (points: Float64Array) => void;
  phaseChanged?: (phase: ConnectionPhase) => void;
  serverError?: (msg: ErrorMsg) => void;
}

export class ViewerSession {
  readonly assets: ViewerAssets;
  readonly client: RoomClient;

  private readonly bindings = new Map<ParsedCloud, Int32Array>();
  private readonly pointers = new Map<number, RemotePointer>();
  private readonly events: ViewerEvents;
  private readonly now: () => number;

  /** Points streamed in by scanners, flat xyz in arrival order. */
  scannedPoints: Float64Array = new Float64Array(0);

  constructor(
    url: string,
    room: string,
    name: string,
    assets: ViewerAssets,
    events: ViewerEvents = {},
    opts: RoomClientOptions = {},
  ) {
    this.assets = assets;
    this.events = events;
    this.now = opts.now ?? (() => Date.now());
    this.bindings.set(
      assets.cloud, bindPoints(assets.cloud.points, assets.model));
    for (const cloud of Object.values(assets.clouds ?? {})) {
      if (!this.bindings.has(cloud)) {
        this.bindings.set(cloud, bindPoints(cloud.points, assets.model));
      }
    }

    const clientEvents: RoomClientEvents = {
      state: (s) => events.stateChanged?.(s),
      roster: (roster) => {
        // drop rays owned by users who left
        const present = new Set(roster.map((r) => r.user_id));
        let changed = false;
        for (const id of [...this.pointers.keys()]) {
          if (!present.has(id)) {
            this.pointers.delete(id);
            changed = true;
          }
        }
        events.rosterChanged?.(roster);
        if (changed) events.pointersChanged?.(this.remotePointers());
      },
      pointer: (msg) => {
        const entry = this.client.roster.find(
          (r) => r.user_id === msg.user_id);
        this.pointers.set(msg.user_id, {
          userId: msg.user_id,
          name: entry ? entry.name : `user ${msg.user_id}`,
          color: entry ? entry.color : [128, 128, 128],
          origin: msg.origin,
          direction: msg.direction,
        });
        events.pointersChanged?.(this.remotePointers());
      },
      scanBatch: (msg) => {
        const added = msg.points.length;
        const merged = new Float64Array(
          this.scannedPoints.length + added * 3);
        merged.set(this.scannedPoints);
        const flat = new Float64Array(added * 3);
        for (let i = 0; i < added; i++) {
          for (let c = 0; c < 3; c++) {
            flat[3 * i + c] = msg.points[i][c];
            merged[this.scannedPoints.length + 3 * i + c] = msg.points[i][c];
          }
        }
        this.scannedPoints = merged;
        events.scanPointsAdded?.(flat);
      },
      welcome: (state, replayed) => {
        if (replayed) {
          // rejoin after a drop: the snapshot replaces anything stale
          events.stateChanged?.(state);
        }
      },
      phase: (phase) => events.phaseChanged?.(phase),
      serverError: (msg) => events.serverError?.(msg),
    };
    this.client = new RoomClient(url, room, name, clientEvents, opts);
  }

  connect(): void {
    this.client.connect();
  }

  close(): void {
    this.client.close();
  }

  /** Announces the departure so the seat frees up immediately. */
  leaveRoom(): void {
    this.client.leave();
  }

  get state(): SessionState | null {
    return this.client.state;
  }

  get phase(): ConnectionPhase {
    return this.client.phase;
  }

  get roster(): RosterEntry[] {
    return this.client.roster;
  }

  remotePointers(): RemotePointer[] {
    return [...this.pointers.values()];
  }

  /** Model names a config panel can offer for switching. */
  availableModels(): string[] {
    return Object.keys(this.assets.clouds ?? {});
  }

  /** Cloud selected by the shared active_model, with fallback. */
  activeCloud(): ParsedCloud {
    const name = this.client.state?.active_model;
    const named = name ? this.assets.clouds?.[name] : undefined;
    return named ?? this.assets.cloud;
  }

  /** Playback time under the authoritative state and the local clock. */
  currentTime(nowMs = this.now()): number {
    const state = this.client.state;
    if (!state) return 0;
    return playbackTime(state, this.client.stateReceivedAt, nowMs);
  }

  /**
   * Deformed, colored frame for a wall-clock instant. A pure function
   * of the last authoritative state; a pending local edit shows up
   * only once the server echoes it back.
   */
  frame(nowMs = this.now()): Frame | null {
    const state = this.client.state;
    if (!state) return null;
    const t = Math.min(this.currentTime(nowMs), this.assets.history.duration);
    return this.frameAt(t, state.scale, state.axis_mask);
  }

  /** Frame for an explicit time and settings, ignoring the clock. */
  frameAt(t: number, scale: number, axisMask: Vec3): Frame {
    const cloud = this.activeCloud();
    const { positions, colors } = renderFrame(
      cloud.points, this.bindings.get(cloud)!, this.assets.history, t,
      { scale, axisMask }, this.assets.model);
    return { time: t, positions, colors };
  }

  /**
   * True when any tracked node's vertical motion crosses the span
   * deflection limit anywhere in the loaded history. Drives the
   * warning banner.
   */
  warningActive(): boolean {
    const state = this.client.state;
    if (!state) return false;
    return anyViolation(
      this.assets.history, state.tracked_nodes, this.assets.model);
  }

  /** Per-node vertical trace with warning intervals, for the plot. */
  trace(nodeId: number): NodeTrace {
    return trackNode(this.assets.history, nodeId, this.assets.model);
  }

  /** Displacement of the node a cloud point is bound to, at time t. */
  pointDisplacement(pointIndex: number, t: number):
      [number, number, number] {
    const binding = this.bindings.get(this.activeCloud())!;
    return sampleDisplacement(this.assets.history, binding[pointIndex], t);
  }

  /* ------------- outbound edits; the server echo applies them ------ */

  sendUpdate(update: StateUpdate): void {
    this.client.sendUpdate(update);
  }

  setScale(scale: number): void {
    this.sendUpdate({ scale });
  }

  setSpeed(speed: number): void {
    this.sendUpdate({ speed });
  }

  setAxisMask(mask: Vec3): void {
    this.sendUpdate({ axis_mask: mask });
  }

  setPlaying(playing: boolean, atTime?: number): void {
    const update: StateUpdate = { playing };
    if (atTime !== undefined) update.playback_time = atTime;
    this.sendUpdate(update);
  }

  seek(t: number): void {
    this.sendUpdate({ playback_time: t });
  }

  setTrackedNodes(nodeIds: number[]): void {
    this.sendUpdate({ tracked_nodes: nodeIds });
  }

  setActiveModel(name: string): void {
    this.sendUpdate({ active_model: name });
  }

  sendPointer(origin: Vec3, direction: Vec3): void {
    this.client.sendPointer(origin, direction);
  }

  sendScanBatch(batchSeq: number, points: Vec3[]): void {
    this.client.sendScanBatch(batchSeq, points);
  }
}
