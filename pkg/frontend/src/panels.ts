/**
 * DOM side panels: playback config, modal comparison table, node
 * tracking plot, roster, and the connection banner. Panels render
 * from the authoritative state they are handed and push edits back
 * through the session; they never mutate what is displayed until the
 * server echoes the change.
 */

import type { ConnectionPhase } from "./client";
import type { RosterEntry, SessionState, Vec3 } from "./protocol";
import type { MatchReport } from "./formats";
import type { NodeTrace } from "./deform";
import type { ViewerSession } from "./viewer";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/* ------------------------------------------------ connection banner */

export class ConnectionBanner {
  readonly root: HTMLDivElement;

  constructor(parent: HTMLElement) {
    this.root = el("div", "conn-banner");
    this.root.style.display = "none";
    parent.appendChild(this.root);
  }

  update(phase: ConnectionPhase): void {
    if (phase === "reconnecting") {
      this.root.textContent =
        "connection lost -- rejoining, the scene will reload";
      this.root.style.display = "block";
    } else if (phase === "rejected") {
      this.root.textContent = "the room is full";
      this.root.style.display = "block";
    } else {
      this.root.style.display = "none";
    }
  }
}

/* -------------------------------------------------- playback config */

export class ConfigPanel {
  readonly root: HTMLDivElement;
  private scale: HTMLInputElement;
  private scaleLabel: HTMLSpanElement;
  private speed: HTMLInputElement;
  private speedLabel: HTMLSpanElement;
  private axes: HTMLInputElement[];
  private playButton: HTMLButtonElement;
  private scrubber: HTMLInputElement;
  private timeLabel: HTMLSpanElement;
  private model: HTMLSelectElement;
  private scrubbing = false;

  constructor(parent: HTMLElement, private session: ViewerSession) {
    this.root = el("div", "panel config-panel");
    this.root.appendChild(el("h3", undefined, "playback"));

    const modelRow = el("div", "row");
    modelRow.appendChild(el("label", undefined, "model"));
    this.model = el("select");
    this.model.addEventListener("change", () => {
      session.setActiveModel(this.model.value);
      this.render(session.state); // selection follows the echo
    });
    modelRow.appendChild(this.model);
    this.root.appendChild(modelRow);

    const scaleRow = el("div", "row");
    scaleRow.appendChild(el("label", undefined, "scale"));
    this.scale = el("input");
    this.scale.type = "range";
    this.scale.min = "0";
    this.scale.max = "500";
    this.scale.step = "1";
    this.scale.addEventListener("change", () =>
      session.setScale(Number(this.scale.value)));
    this.scaleLabel = el("span", "value");
    scaleRow.append(this.scale, this.scaleLabel);
    this.root.appendChild(scaleRow);

    const speedRow = el("div", "row");
    speedRow.appendChild(el("label", undefined, "speed"));
    this.speed = el("input");
    this.speed.type = "range";
    this.speed.min = "0.1";
    this.speed.max = "4";
    this.speed.step = "0.1";
    this.speed.addEventListener("change", () =>
      session.setSpeed(Number(this.speed.value)));
    this.speedLabel = el("span", "value");
    speedRow.append(this.speed, this.speedLabel);
    this.root.appendChild(speedRow);

    const axisRow = el("div", "row");
    axisRow.appendChild(el("label", undefined, "axes"));
    this.axes = (["x", "y", "z"] as const).map((name, i) => {
      const wrap = el("label", "axis");
      const box = el("input");
      box.type = "checkbox";
      box.addEventListener("change", () => {
        const mask = this.axes.map((b) => (b.checked ? 1 : 0)) as Vec3;
        session.setAxisMask(mask);
        // restore displayed mask from state; the echo will move it
        this.render(session.state);
      });
      wrap.append(box, document.createTextNode(name));
      axisRow.appendChild(wrap);
      void i;
      return box;
    });
    this.root.appendChild(axisRow);

    const playRow = el("div", "row");
    this.playButton = el("button", undefined, "play");
    this.playButton.addEventListener("click", () => {
      const s = session.state;
      if (!s) return;
      if (s.playing) session.setPlaying(false, session.currentTime());
      else session.setPlaying(true);
    });
    this.scrubber = el("input");
    this.scrubber.type = "range";
    this.scrubber.min = "0";
    this.scrubber.step = "0.01";
    this.scrubber.addEventListener("pointerdown", () => {
      this.scrubbing = true;
    });
    this.scrubber.addEventListener("change", () => {
      this.scrubbing = false;
      session.seek(Number(this.scrubber.value));
    });
    this.timeLabel = el("span", "value");
    playRow.append(this.playButton, this.scrubber, this.timeLabel);
    this.root.appendChild(playRow);

    parent.appendChild(this.root);
  }

  render(state: SessionState | null): void {
    if (!state) return;
    const names = new Set(
      [state.active_model, ...this.session.availableModels()]);
    if (this.model.options.length !== names.size) {
      this.model.textContent = "";
      for (const name of names) {
        const opt = el("option", undefined, name);
        opt.value = name;
        this.model.appendChild(opt);
      }
    }
    this.model.value = state.active_model;
    this.scale.value = String(state.scale);
    this.scaleLabel.textContent = `x${state.scale}`;
    this.speed.value = String(state.speed);
    this.speedLabel.textContent = `x${state.speed.toFixed(1)}`;
    for (let i = 0; i < 3; i++) {
      this.axes[i].checked = state.axis_mask[i] !== 0;
    }
    this.playButton.textContent = state.playing ? "pause" : "play";
    this.scrubber.max = String(state.duration_s);
  }

  /** Called each animation tick with the extrapolated clock. */
  tick(t: number): void {
    if (!this.scrubbing) this.scrubber.value = String(t);
    this.timeLabel.textContent = `${t.toFixed(2)} s`;
  }
}

/* --------------------------------------------- modal comparison table */

export class ModalPanel {
  readonly root: HTMLDivElement;

  constructor(parent: HTMLElement) {
    this.root = el("div", "panel modal-panel");
    this.root.appendChild(el("h3", undefined, "measured vs model modes"));
    parent.appendChild(this.root);
  }

  render(report: MatchReport): void {
    const old = this.root.querySelector("table");
    if (old) old.remove();
    const oldNote = this.root.querySelector(".note");
    if (oldNote) oldNote.remove();

    const table = el("table");
    const head = el("tr");
    for (const h of ["measured Hz", "model Hz", "df %", "damping %", "MAC"]) {
      head.appendChild(el("th", undefined, h));
    }
    table.appendChild(head);
    for (const p of report.pairs) {
      const row = el("tr");
      row.appendChild(el("td", undefined, p.omaFrequencyHz.toFixed(3)));
      row.appendChild(el("td", undefined, p.feaFrequencyHz.toFixed(3)));
      row.appendChild(
        el("td", undefined, (100 * p.freqDiffRel).toFixed(2)));
      row.appendChild(
        el("td", undefined, (100 * p.omaDampingRatio).toFixed(2)));
      const mac = el("td", undefined, p.mac.toFixed(4));
      if (p.mac < 0.9) mac.className = "low-mac";
      row.appendChild(mac);
      table.appendChild(row);
    }
    this.root.appendChild(table);

    const leftovers = report.unmatchedOma.length + report.unmatchedFea.length;
    if (leftovers > 0) {
      this.root.appendChild(el(
        "div", "note",
        `${report.unmatchedOma.length} measured / ` +
        `${report.unmatchedFea.length} model modes unmatched`));
    }
  }
}

/* ------------------------------------------------ node tracking plot */

export class TrackingPanel {
  readonly root: HTMLDivElement;
  private banner: HTMLDivElement;
  private canvas: HTMLCanvasElement;

  constructor(parent: HTMLElement) {
    this.root = el("div", "panel tracking-panel");
    this.root.appendChild(el("h3", undefined, "tracked nodes"));
    this.banner = el("div", "warning-banner");
    this.banner.style.display = "none";
    this.banner.textContent = "deflection limit exceeded";
    this.root.appendChild(this.banner);
    this.canvas = el("canvas");
    this.canvas.width = 360;
    this.canvas.height = 180;
    this.root.appendChild(this.canvas);
    parent.appendChild(this.root);
  }

  render(traces: NodeTrace[], limitIn: number, warning: boolean): void {
    this.banner.style.display = warning ? "block" : "none";

    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    if (traces.length === 0) return;

    const tMax = Math.max(
      ...traces.map((tr) => tr.times[tr.times.length - 1] ?? 0), 1e-9);
    let ampIn = limitIn;
    for (const tr of traces) {
      for (const v of tr.verticalMeters) {
        ampIn = Math.max(ampIn, Math.abs(v) / 0.0254);
      }
    }
    const sx = (t: number) => (t / tMax) * (width - 20) + 10;
    const sy = (valIn: number) =>
      height / 2 - (valIn / (1.1 * ampIn)) * (height / 2 - 10);

    // warning intervals, shaded behind the traces
    ctx.fillStyle = "rgba(255, 80, 80, 0.25)";
    for (const tr of traces) {
      for (const w of tr.warnings) {
        ctx.fillRect(sx(w.start), 0, sx(w.end) - sx(w.start), height);
      }
    }

    // +/- limit lines
    ctx.strokeStyle = "#c05050";
    ctx.setLineDash([4, 3]);
    for (const sign of [1, -1]) {
      ctx.beginPath();
      ctx.moveTo(sx(0), sy(sign * limitIn));
      ctx.lineTo(sx(tMax), sy(sign * limitIn));
      ctx.stroke();
    }
    ctx.setLineDash([]);

    const palette = ["#6fb3ff", "#ffd166", "#95e06c", "#e39ff6"];
    traces.forEach((tr, k) => {
      ctx.strokeStyle = palette[k % palette.length];
      ctx.beginPath();
      for (let i = 0; i < tr.times.length; i++) {
        const x = sx(tr.times[i]);
        const y = sy(tr.verticalMeters[i] / 0.0254);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      }
      ctx.stroke();
      ctx.fillStyle = ctx.strokeStyle;
      ctx.fillText(`node ${tr.nodeId}`, 12, 12 + 12 * k);
    });
  }
}

/* --------------------------------------------------------- roster */

export class RosterPanel {
  readonly root: HTMLDivElement;
  private list: HTMLUListElement;

  constructor(parent: HTMLElement) {
    this.root = el("div", "panel roster-panel");
    this.root.appendChild(el("h3", undefined, "in the room"));
    this.list = el("ul");
    this.root.appendChild(this.list);
    parent.appendChild(this.root);
  }

  render(roster: RosterEntry[], selfId: number | null): void {
    this.list.textContent = "";
    for (const user of roster) {
      const item = el("li");
      const chip = el("span", "chip");
      chip.style.background =
        `rgb(${user.color[0]}, ${user.color[1]}, ${user.color[2]})`;
      item.appendChild(chip);
      item.appendChild(document.createTextNode(
        user.user_id === selfId ? `${user.name} (you)` : user.name));
      this.list.appendChild(item);
    }
  }
}
