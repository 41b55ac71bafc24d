/** Browser entry point: wires the canvas, panels, and server connection.

All simulation truth lives on the server; this file only routes DOM
events into validated endpoint calls and repaints whatever the latest
frame says.  Reloading the page reconstructs the identical view from
GET /scene and GET /field.
*/

import { ApiError, PlaygroundClient } from "./client.js";
import { DEFAULT_ISO_LEVELS } from "./contours.js";
import { scenarioJson } from "./exporter.js";
import { buildLut, downsample, rasterToRgba, type Raster } from "./heatmap.js";
import { orientationFromDrag, pick, type PickTarget } from "./picking.js";
import { render, type RenderOptions } from "./render.js";
import { FrameStream } from "./socket.js";
import { SceneStore } from "./store.js";
import { ToastQueue } from "./toasts.js";
import type { Edit, FieldLayer, SceneFrame, Vec2 } from "./types.js";
import { Viewport } from "./viewport.js";

const SOCIAL_SLIDERS: { key: string; label: string; min: number; max: number; step: number }[] = [
  { key: "sigma_front", label: "sigma front", min: 0.1, max: 1.5, step: 0.05 },
  { key: "sigma_side", label: "sigma side", min: 0.1, max: 1.5, step: 0.05 },
  { key: "sigma_rear", label: "sigma rear", min: 0.1, max: 1.5, step: 0.05 },
  { key: "velocity_gain", label: "velocity gain", min: 0, max: 2, step: 0.1 },
  { key: "seated_scale", label: "seated scale", min: 0.5, max: 2.5, step: 0.1 },
  { key: "group_sigma", label: "group sigma", min: 0.2, max: 2, step: 0.05 },
  { key: "peak", label: "peak", min: 0.2, max: 2, step: 0.05 },
];

const WEIGHT_SLIDERS: { key: string; label: string; min: number; max: number; step: number }[] = [
  { key: "goal", label: "w goal", min: 0, max: 10, step: 0.25 },
  { key: "social", label: "w social", min: 0, max: 30, step: 0.5 },
  { key: "effort", label: "w effort", min: 0, max: 2, step: 0.05 },
  { key: "terminal", label: "w terminal", min: 0, max: 40, step: 0.5 },
];

type DragState =
  | { kind: "pan"; last: Vec2 }
  | { kind: "agent"; agent: string; editId: number; moved: boolean }
  | { kind: "handle"; agent: string; editId: number; orientation: number }
  | { kind: "goal"; editId: number; goal: Vec2 }
  | null;

class App {
  private readonly client: PlaygroundClient;
  private readonly store = new SceneStore();
  private readonly toasts = new ToastQueue();
  private readonly view: Viewport;
  private readonly canvas: HTMLCanvasElement;
  private readonly ctx: CanvasRenderingContext2D;
  private readonly lut = buildLut();

  private layer: FieldLayer = "total";
  private showHeatmap = true;
  private showContours = true;
  private showTracks = true;
  private showIds = true;
  private showGroups = true;
  private showPlan = true;
  private selectedAgent: string | null = null;
  private drag: DragState = null;
  private placing = false;
  private fitted = false;
  private renderQueued = false;

  private fieldRaster: Raster | null = null;
  private fieldImage: HTMLCanvasElement | null = null;
  private fieldImageKey = "";
  private fieldFetchInFlight = false;

  constructor(baseUrl: string) {
    this.client = new PlaygroundClient(baseUrl);
    this.canvas = document.getElementById("scene") as HTMLCanvasElement;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
    this.view = new Viewport(this.canvas.width, this.canvas.height);
    this.store.subscribe(() => this.scheduleRender());
    this.toasts.onChange = () => this.renderToasts();
  }

  async start(): Promise<void> {
    this.bindCanvas();
    this.bindPanels();
    this.observeResize();
    try {
      const frame = await this.client.getScene();
      this.store.applyFrame(frame);
      await this.refreshField(true);
    } catch (err) {
      this.report(err, "initial load failed");
    }
    const stream = new FrameStream(this.client.wsUrl(), (frame) =>
      this.onFrame(frame),
    );
    stream.start();
    this.scheduleRender();
  }

  // -- frames and field ---------------------------------------------------

  private onFrame(frame: SceneFrame): void {
    if (!this.store.applyFrame(frame)) return;
    const cached = this.store.getField(this.layer);
    if (!cached || cached.version !== frame.field_version) {
      void this.refreshField(false);
    }
  }

  private async refreshField(force: boolean): Promise<void> {
    const frame = this.store.latest();
    const cached = this.store.getField(this.layer);
    if (!force && cached && frame && cached.version === frame.field_version) {
      return;
    }
    if (this.fieldFetchInFlight) return;
    this.fieldFetchInFlight = true;
    try {
      const field = await this.client.getField(this.layer);
      this.store.setField(field);
    } catch (err) {
      this.report(err, "field fetch failed");
    } finally {
      this.fieldFetchInFlight = false;
    }
  }

  private ensureFieldImage(): void {
    const field = this.store.getField(this.layer);
    if (!field) {
      this.fieldRaster = null;
      this.fieldImage = null;
      this.fieldImageKey = "";
      return;
    }
    const key = `${field.layer}:${field.version}`;
    if (key === this.fieldImageKey && this.fieldImage) return;
    const raster = downsample(field);
    let vmax = 1;
    for (const v of raster.values) if (v > vmax) vmax = v;
    const rgba = rasterToRgba(raster, this.lut, vmax);
    const tile = document.createElement("canvas");
    tile.width = raster.nx;
    tile.height = raster.ny;
    const tctx = tile.getContext("2d");
    if (!tctx) return;
    tctx.putImageData(new ImageData(rgba, raster.nx, raster.ny), 0, 0);
    this.fieldRaster = raster;
    this.fieldImage = tile;
    this.fieldImageKey = key;
  }

  // -- edits ---------------------------------------------------------------

  private sendEdit(edit: Edit, editId: number): void {
    this.client
      .postEdit(edit)
      .then((ack) => this.store.ackOptimistic(editId, ack.applies_at_tick))
      .catch((err) => {
        this.store.dropOptimistic(editId);
        const retryable = err instanceof ApiError && err.retryable;
        const message =
          err instanceof ApiError ? err.detail : "edit failed: server unreachable";
        this.toasts.push(
          message,
          "error",
          retryable ? () => this.sendEdit(edit, this.store.addOptimistic(edit)) : undefined,
        );
      });
  }

  private postEditOptimistic(edit: Edit): void {
    this.sendEdit(edit, this.store.addOptimistic(edit));
  }

  // -- canvas gestures -----------------------------------------------------

  private canvasPoint(ev: PointerEvent | MouseEvent | WheelEvent): Vec2 {
    const rect = this.canvas.getBoundingClientRect();
    return [ev.clientX - rect.left, ev.clientY - rect.top];
  }

  private bindCanvas(): void {
    const canvas = this.canvas;
    canvas.addEventListener("pointerdown", (ev) => this.onPointerDown(ev));
    canvas.addEventListener("pointermove", (ev) => this.onPointerMove(ev));
    canvas.addEventListener("pointerup", (ev) => this.onPointerUp(ev));
    canvas.addEventListener("pointercancel", () => (this.drag = null));
    canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const factor = Math.exp(-ev.deltaY * 0.0015);
      this.view.zoomAt(this.canvasPoint(ev), factor);
      this.scheduleRender();
    });
    canvas.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      const frame = this.store.view();
      if (!frame) return;
      const world = this.view.screenToWorld(this.canvasPoint(ev));
      const hit = pick(frame, this.view, world);
      if (hit && hit.kind !== "goal") {
        const agent = frame.agents.find((a) => a.id === hit.agent);
        if (!agent) return;
        // Plain right-click flips seated; shift flips speaking.
        if (ev.shiftKey) {
          this.postEditOptimistic({
            op: "set_speaking",
            agent: agent.id,
            speaking: !agent.speaking,
          });
        } else {
          this.postEditOptimistic({
            op: "set_seated",
            agent: agent.id,
            seated: !agent.seated,
          });
        }
      }
    });
    window.addEventListener("keydown", (ev) => {
      if (ev.key === "Delete" && this.selectedAgent) {
        this.postEditOptimistic({ op: "remove", agent: this.selectedAgent });
        this.selectedAgent = null;
        this.scheduleRender();
      }
    });
  }

  private onPointerDown(ev: PointerEvent): void {
    if (ev.button !== 0) return;
    this.canvas.setPointerCapture(ev.pointerId);
    const screen = this.canvasPoint(ev);
    const world = this.view.screenToWorld(screen);
    const frame = this.store.view();

    if (this.placing) {
      this.placing = false;
      document.body.classList.remove("placing");
      const id = this.freshAgentId();
      this.postEditOptimistic({ op: "add", agent: id, pos: world, orientation: 0 });
      this.selectedAgent = id;
      this.scheduleRender();
      return;
    }

    const hit: PickTarget = frame ? pick(frame, this.view, world) : null;
    if (hit?.kind === "handle") {
      const agent = frame!.agents.find((a) => a.id === hit.agent);
      const orientation = agent ? agent.orientation : 0;
      const editId = this.store.addOptimistic({
        op: "set_orientation",
        agent: hit.agent,
        orientation,
      });
      this.drag = { kind: "handle", agent: hit.agent, editId, orientation };
    } else if (hit?.kind === "agent") {
      const agent = frame!.agents.find((a) => a.id === hit.agent)!;
      const editId = this.store.addOptimistic({
        op: "move",
        agent: hit.agent,
        pos: agent.pos,
      });
      this.drag = { kind: "agent", agent: hit.agent, editId, moved: false };
      this.selectedAgent = hit.agent;
    } else if (hit?.kind === "goal") {
      const goal = frame!.robot.goal!;
      const editId = this.store.addOptimistic({ op: "move_goal", goal });
      this.drag = { kind: "goal", editId, goal };
    } else {
      this.drag = { kind: "pan", last: screen };
      this.selectedAgent = null;
    }
    this.scheduleRender();
  }

  private onPointerMove(ev: PointerEvent): void {
    const drag = this.drag;
    if (!drag) return;
    const screen = this.canvasPoint(ev);
    const world = this.view.screenToWorld(screen);
    switch (drag.kind) {
      case "pan": {
        this.view.panBy(screen[0] - drag.last[0], screen[1] - drag.last[1]);
        drag.last = screen;
        break;
      }
      case "agent": {
        drag.moved = true;
        this.store.updateOptimistic(drag.editId, {
          op: "move",
          agent: drag.agent,
          pos: world,
        });
        break;
      }
      case "handle": {
        const frame = this.store.view();
        const agent = frame?.agents.find((a) => a.id === drag.agent);
        if (agent) {
          drag.orientation = orientationFromDrag(agent.pos, world);
          this.store.updateOptimistic(drag.editId, {
            op: "set_orientation",
            agent: drag.agent,
            orientation: drag.orientation,
          });
        }
        break;
      }
      case "goal": {
        drag.goal = world;
        this.store.updateOptimistic(drag.editId, {
          op: "move_goal",
          goal: world,
        });
        break;
      }
    }
    this.scheduleRender();
  }

  private onPointerUp(ev: PointerEvent): void {
    const drag = this.drag;
    this.drag = null;
    if (!drag) return;
    const world = this.view.screenToWorld(this.canvasPoint(ev));
    switch (drag.kind) {
      case "pan":
        break;
      case "agent": {
        if (drag.moved) {
          const edit: Edit = { op: "move", agent: drag.agent, pos: world };
          this.store.updateOptimistic(drag.editId, edit);
          this.sendEdit(edit, drag.editId);
        } else {
          // A click without movement is a selection, not an edit.
          this.store.dropOptimistic(drag.editId);
        }
        break;
      }
      case "handle": {
        const edit: Edit = {
          op: "set_orientation",
          agent: drag.agent,
          orientation: drag.orientation,
        };
        this.sendEdit(edit, drag.editId);
        break;
      }
      case "goal": {
        const edit: Edit = { op: "move_goal", goal: world };
        this.store.updateOptimistic(drag.editId, edit);
        this.sendEdit(edit, drag.editId);
        break;
      }
    }
    this.scheduleRender();
  }

  private freshAgentId(): string {
    const frame = this.store.view();
    const taken = new Set(frame ? frame.agents.map((a) => a.id) : []);
    let n = 1;
    while (taken.has(`agent_${n}`)) n++;
    return `agent_${n}`;
  }

  // -- panels ----------------------------------------------------------------

  private bindPanels(): void {
    this.bindTransport();
    this.bindLayers();
    this.bindSliders();
    this.bindExport();
  }

  private control(req: Parameters<PlaygroundClient["control"]>[0]): void {
    this.client.control(req).catch((err) => this.report(err, "control failed"));
  }

  private bindTransport(): void {
    byId("play").addEventListener("click", () => this.control({ action: "play" }));
    byId("pause").addEventListener("click", () => this.control({ action: "pause" }));
    byId("step").addEventListener("click", () => this.control({ action: "step" }));
    byId("reset").addEventListener("click", () => {
      const raw = (byId("seed") as HTMLInputElement).value.trim();
      const req: { action: "reset"; seed?: number } = { action: "reset" };
      if (raw !== "") {
        const seed = Number(raw);
        if (!Number.isInteger(seed) || seed < 0) {
          this.toasts.push("seed must be a non-negative integer", "error");
          return;
        }
        req.seed = seed;
      }
      this.control(req);
    });
    byId("add-agent").addEventListener("click", () => {
      this.placing = true;
      document.body.classList.add("placing");
    });
  }

  private bindLayers(): void {
    for (const layer of ["social", "obstacle", "total"] as FieldLayer[]) {
      byId(`layer-${layer}`).addEventListener("change", () => {
        this.layer = layer;
        void this.refreshField(true);
        this.scheduleRender();
      });
    }
    const toggles: [string, (v: boolean) => void][] = [
      ["toggle-heatmap", (v) => (this.showHeatmap = v)],
      ["toggle-contours", (v) => (this.showContours = v)],
      ["toggle-tracks", (v) => (this.showTracks = v)],
      ["toggle-ids", (v) => (this.showIds = v)],
      ["toggle-groups", (v) => (this.showGroups = v)],
      ["toggle-plan", (v) => (this.showPlan = v)],
    ];
    for (const [id, apply] of toggles) {
      const box = byId(id) as HTMLInputElement;
      box.addEventListener("change", () => {
        apply(box.checked);
        this.scheduleRender();
      });
    }
  }

  private bindSliders(): void {
    const social = byId("social-sliders");
    const weights = byId("weight-sliders");
    for (const spec of SOCIAL_SLIDERS) {
      social.appendChild(this.makeSlider(spec, "social"));
    }
    for (const spec of WEIGHT_SLIDERS) {
      weights.appendChild(this.makeSlider(spec, "weights"));
    }
  }

  private makeSlider(
    spec: { key: string; label: string; min: number; max: number; step: number },
    group: "social" | "weights",
  ): HTMLElement {
    const row = document.createElement("label");
    row.className = "slider-row";
    const name = document.createElement("span");
    name.textContent = spec.label;
    const value = document.createElement("span");
    value.className = "slider-value";
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(spec.min);
    input.max = String(spec.max);
    input.step = String(spec.step);
    input.addEventListener("change", () => {
      const payload = { [group]: { [spec.key]: Number(input.value) } };
      this.client
        .postParams(payload)
        .then((echo) => {
          const bucket = group === "social" ? echo.social : echo.weights;
          const echoed = (bucket as unknown as Record<string, number>)[spec.key];
          input.value = String(echoed);
          value.textContent = echoed.toFixed(2);
        })
        .catch((err) => this.report(err, "param update failed"));
    });
    input.addEventListener("input", () => {
      value.textContent = Number(input.value).toFixed(2);
    });
    row.appendChild(name);
    row.appendChild(input);
    row.appendChild(value);
    return row;
  }

  private bindExport(): void {
    byId("export").addEventListener("click", () => {
      const frame = this.store.view();
      if (!frame) return;
      let text: string;
      try {
        text = scenarioJson(frame);
      } catch (err) {
        this.report(err, "export failed");
        return;
      }
      const blob = new Blob([text], { type: "application/json" });
      const url = URL.createObjectURL(blob);
      const a = document.createElement("a");
      a.href = url;
      a.download = `${frame.scenario.name}_edited.json`;
      a.click();
      URL.revokeObjectURL(url);
      const out = byId("export-preview");
      out.textContent = text;
    });
  }

  // -- output ------------------------------------------------------------------

  private report(err: unknown, fallback: string): void {
    const message =
      err instanceof ApiError ? err.detail : err instanceof Error ? err.message : fallback;
    this.toasts.push(message, "error");
  }

  private renderToasts(): void {
    const host = byId("toasts");
    host.textContent = "";
    for (const toast of this.toasts.active()) {
      const el = document.createElement("div");
      el.className = `toast toast-${toast.kind}`;
      const msg = document.createElement("span");
      msg.textContent = toast.message;
      el.appendChild(msg);
      if (toast.retry) {
        const btn = document.createElement("button");
        btn.textContent = "retry";
        btn.addEventListener("click", () => {
          toast.retry?.();
          this.toasts.dismiss(toast.id);
        });
        el.appendChild(btn);
      }
      const close = document.createElement("button");
      close.textContent = "x";
      close.addEventListener("click", () => this.toasts.dismiss(toast.id));
      el.appendChild(close);
      host.appendChild(el);
    }
  }

  private observeResize(): void {
    const fit = () => {
      const holder = this.canvas.parentElement;
      if (!holder) return;
      const rect = holder.getBoundingClientRect();
      this.canvas.width = Math.max(200, Math.floor(rect.width));
      this.canvas.height = Math.max(200, Math.floor(rect.height));
      this.view.resize(this.canvas.width, this.canvas.height);
      this.scheduleRender();
    };
    window.addEventListener("resize", fit);
    fit();
  }

  private scheduleRender(): void {
    if (this.renderQueued) return;
    this.renderQueued = true;
    requestAnimationFrame(() => {
      this.renderQueued = false;
      this.paint();
    });
  }

  private paint(): void {
    const frame = this.store.view();
    if (!frame) return;
    if (!this.fitted) {
      const field = this.store.getField(this.layer);
      if (field) {
        this.view.fitGrid(field.origin, field.nx, field.ny, field.resolution);
        this.fitted = true;
      }
    }
    this.ensureFieldImage();
    const opts: RenderOptions = {
      showHeatmap: this.showHeatmap,
      showContours: this.showContours,
      showTracks: this.showTracks,
      showIds: this.showIds,
      showGroups: this.showGroups,
      showPlan: this.showPlan,
      isoLevels: DEFAULT_ISO_LEVELS,
      selectedAgent: this.selectedAgent,
      fieldImage: this.fieldImage,
      fieldRaster: this.fieldRaster,
    };
    render(this.ctx, this.view, frame, opts);
    this.renderStatusLine(frame);
  }

  private renderStatusLine(frame: SceneFrame): void {
    const status = byId("status-line");
    const mode = frame.playing ? "playing" : "paused";
    status.textContent =
      `${frame.scenario.name}  seed ${frame.scenario.seed}  ${mode}  ` +
      `t=${frame.time.toFixed(1)}s / ${frame.scenario.duration.toFixed(0)}s  ` +
      `stops ${frame.stop_events}  field v${frame.field_version}`;
  }
}

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

const base =
  new URLSearchParams(window.location.search).get("server") ??
  "http://127.0.0.1:8000";
const app = new App(base);
void app.start();
