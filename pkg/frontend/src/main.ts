/**
 * Browser entry point. Loads the scene assets, joins the room named
 * in the query string, and wires the session to the scene and the
 * side panels. Query parameters:
 *
 *   ?server=ws://host:port  room server (default ws://localhost:8765)
 *   &room=deck-a            room name   (default "default")
 *   &name=ana               display name (default "viewer")
 */

import { SceneView } from "./scene";
import { ViewerSession } from "./viewer";
import {
  ConfigPanel,
  ConnectionBanner,
  ModalPanel,
  RosterPanel,
  TrackingPanel,
} from "./panels";
import { parsePly } from "./ply";
import {
  parseHistoryCsv,
  parseMatchReportJson,
  parseModelJson,
} from "./formats";

async function fetchBytes(url: string): Promise<ArrayBuffer> {
  const res = await fetch(url);
  if (!res.ok) throw new Error(`${url}: HTTP ${res.status}`);
  return res.arrayBuffer();
}

async function fetchText(url: string): Promise<string> {
  const res = await fetch(url);
  if (!res.ok) throw new Error(`${url}: HTTP ${res.status}`);
  return res.text();
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? "ws://localhost:8765";
  const room = params.get("room") ?? "default";
  const name = params.get("name") ?? "viewer";

  const [cloudBytes, modelText, historyText, matchText] = await Promise.all([
    fetchBytes("assets/cloud.ply"),
    fetchText("assets/model.json"),
    fetchText("assets/history.csv"),
    fetchText("assets/match_report.json"),
  ]);

  // optional alternative clouds, keyed by the shared active_model name
  const clouds: Record<string, ReturnType<typeof parsePly>> = {};
  for (const name of ["tls_pointcloud", "uav_pointcloud", "fea_overlay"]) {
    try {
      clouds[name] = parsePly(await fetchBytes(`assets/${name}.ply`));
    } catch {
      // not shipped with this deployment; the selector just omits it
    }
  }

  const assets = {
    cloud: parsePly(cloudBytes),
    clouds,
    model: parseModelJson(modelText),
    history: parseHistoryCsv(historyText),
  };
  const matchReport = parseMatchReportJson(matchText);

  const viewport = document.getElementById("viewport") as HTMLElement;
  const sidebar = document.getElementById("sidebar") as HTMLElement;
  const scene = new SceneView(viewport);
  scene.setCloud(assets.cloud.points);

  const banner = new ConnectionBanner(document.body);
  const modal = new ModalPanel(sidebar);
  modal.render(matchReport);
  const tracking = new TrackingPanel(sidebar);
  const roster = new RosterPanel(sidebar);

  let config: ConfigPanel | null = null;

  const refreshTracking = () => {
    const state = session.state;
    if (!state) return;
    const traces = state.tracked_nodes
      .filter((id) => assets.history.samples.has(id))
      .map((id) => session.trace(id));
    tracking.render(
      traces, assets.model.spanLengthIn / 1000, session.warningActive());
  };

  const session = new ViewerSession(server, room, name, assets, {
    stateChanged: (state) => {
      config?.render(state);
      refreshTracking();
    },
    rosterChanged: (users) => roster.render(users, session.client.userId),
    pointersChanged: (pointers) => scene.setPointers(pointers),
    scanPointsAdded: (points) => scene.addScanPoints(points),
    phaseChanged: (phase) => banner.update(phase),
    serverError: (msg) =>
      console.warn(`room server: ${msg.code}: ${msg.message}`),
  });
  config = new ConfigPanel(sidebar, session);
  session.connect();

  let shownCloud = assets.cloud;
  const animate = () => {
    requestAnimationFrame(animate);
    const active = session.activeCloud();
    if (active !== shownCloud) {
      shownCloud = active;
      scene.setCloud(active.points);
    }
    const frame = session.frame();
    if (frame) {
      scene.applyFrame(frame);
      config?.tick(frame.time);
    }
    scene.render();
  };
  animate();
}

boot().catch((err) => {
  const div = document.createElement("div");
  div.className = "boot-error";
  div.textContent = `failed to start: ${err}`;
  document.body.appendChild(div);
});
