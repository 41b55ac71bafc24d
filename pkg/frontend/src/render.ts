/** Canvas painter for the playground scene.

Pure drawing only: the caller owns the canvas, viewport, and all state;
every frame is repainted from scratch.  World geometry goes through the
viewport transform, so pan/zoom never touches the draw code.
*/

import { contourSegments } from "./contours.js";
import type { Raster } from "./heatmap.js";
import { AGENT_RADIUS_M, HANDLE_RADIUS_M, handlePosition } from "./picking.js";
import type { SceneFrame } from "./types.js";
import { scaleReadout, Viewport } from "./viewport.js";

export interface RenderOptions {
  showHeatmap: boolean;
  showContours: boolean;
  showTracks: boolean;
  showIds: boolean;
  showGroups: boolean;
  showPlan: boolean;
  isoLevels: number[];
  selectedAgent: string | null;
  /** Pre-painted heatmap tile; null hides the layer this frame. */
  fieldImage: CanvasImageSource | null;
  /** Downsampled grid backing the contour pass. */
  fieldRaster: Raster | null;
}

const COLORS = {
  background: "#10141a",
  grid: "#1d242e",
  agent: "#4cc2ff",
  agentSeated: "#9a8cff",
  speaking: "#ffd166",
  handle: "#f4f7fa",
  robot: "#7dff9b",
  goal: "#ff6b8a",
  plan: "#7dff9b",
  track: "#ff9d5c",
  group: "rgba(130, 220, 160, 0.25)",
  groupEdge: "rgba(130, 220, 160, 0.8)",
  contour: ["#3fa7ff", "#ffb347", "#ff5c5c"],
  text: "#d7dee8",
};

export function render(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  frame: SceneFrame,
  opts: RenderOptions,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, view.width, view.height);

  drawGrid(ctx, view);
  if (opts.showHeatmap && opts.fieldImage && opts.fieldRaster) {
    drawField(ctx, view, opts.fieldImage, opts.fieldRaster);
  }
  if (opts.showContours && opts.fieldRaster) {
    drawContours(ctx, view, opts.fieldRaster, opts.isoLevels);
  }
  if (opts.showGroups) drawGroups(ctx, view, frame);
  if (opts.showPlan) drawPlan(ctx, view, frame);
  if (opts.showTracks) drawTracks(ctx, view, frame, opts.showIds);
  drawAgents(ctx, view, frame, opts);
  drawRobot(ctx, view, frame);
  drawGoal(ctx, view, frame);
  drawHud(ctx, view, frame);
}

function drawGrid(ctx: CanvasRenderingContext2D, view: Viewport): void {
  const tl = view.screenToWorld([0, 0]);
  const br = view.screenToWorld([view.width, view.height]);
  ctx.strokeStyle = COLORS.grid;
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (let x = Math.ceil(tl[0]); x <= Math.floor(br[0]); x++) {
    const [sx] = view.worldToScreen([x, 0]);
    ctx.moveTo(sx, 0);
    ctx.lineTo(sx, view.height);
  }
  for (let y = Math.ceil(br[1]); y <= Math.floor(tl[1]); y++) {
    const [, sy] = view.worldToScreen([0, y]);
    ctx.moveTo(0, sy);
    ctx.lineTo(view.width, sy);
  }
  ctx.stroke();
}

function drawField(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  image: CanvasImageSource,
  raster: Raster,
): void {
  const spanX = raster.nx * raster.resolution;
  const spanY = raster.ny * raster.resolution;
  const topLeft = view.worldToScreen([raster.origin[0], raster.origin[1] + spanY]);
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(
    image,
    topLeft[0],
    topLeft[1],
    spanX * view.scale,
    spanY * view.scale,
  );
}

function drawContours(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  raster: Raster,
  isoLevels: number[],
): void {
  ctx.lineWidth = 1.2;
  isoLevels.forEach((iso, i) => {
    ctx.strokeStyle = COLORS.contour[i % COLORS.contour.length];
    ctx.beginPath();
    for (const [a, b] of contourSegments(raster, iso)) {
      const sa = view.worldToScreen(a);
      const sb = view.worldToScreen(b);
      ctx.moveTo(sa[0], sa[1]);
      ctx.lineTo(sb[0], sb[1]);
    }
    ctx.stroke();
  });
}

function drawGroups(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  frame: SceneFrame,
): void {
  for (const group of frame.groups) {
    if (!group.center || group.members.length < 2) continue;
    const [sx, sy] = view.worldToScreen(group.center);
    const radius = 0.9 * view.scale;
    ctx.fillStyle = COLORS.group;
    ctx.strokeStyle = COLORS.groupEdge;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(sx, sy, radius, 0, Math.PI * 2);
    ctx.fill();
    ctx.stroke();
    ctx.fillStyle = COLORS.text;
    ctx.font = "11px sans-serif";
    ctx.fillText(group.id, sx + 4, sy - radius - 4);
  }
}

function drawPlan(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  frame: SceneFrame,
): void {
  const plan = frame.plan;
  if (!plan || !plan.trajectory || plan.trajectory.length === 0) return;
  ctx.strokeStyle = COLORS.plan;
  ctx.lineWidth = 1.5;
  ctx.setLineDash([6, 4]);
  ctx.beginPath();
  const start = view.worldToScreen([frame.robot.pose[0], frame.robot.pose[1]]);
  ctx.moveTo(start[0], start[1]);
  for (const p of plan.trajectory) {
    const s = view.worldToScreen(p);
    ctx.lineTo(s[0], s[1]);
  }
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawTracks(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  frame: SceneFrame,
  showIds: boolean,
): void {
  for (const track of frame.tracks) {
    const [sx, sy] = view.worldToScreen([track.x, track.y]);
    ctx.strokeStyle = COLORS.track;
    ctx.lineWidth = track.status === "confirmed" ? 2 : 1;
    ctx.beginPath();
    ctx.arc(sx, sy, 0.3 * view.scale, 0, Math.PI * 2);
    ctx.stroke();
    const speed = Math.hypot(track.vx, track.vy);
    if (speed > 0.05) {
      const tip = view.worldToScreen([
        track.x + track.vx * 0.8,
        track.y + track.vy * 0.8,
      ]);
      ctx.beginPath();
      ctx.moveTo(sx, sy);
      ctx.lineTo(tip[0], tip[1]);
      ctx.stroke();
    }
    if (showIds) {
      ctx.fillStyle = COLORS.track;
      ctx.font = "11px sans-serif";
      ctx.fillText(track.id, sx + 6, sy - 6);
    }
  }
}

function drawAgents(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  frame: SceneFrame,
  opts: RenderOptions,
): void {
  for (const agent of frame.agents) {
    const [sx, sy] = view.worldToScreen(agent.pos);
    const radius = AGENT_RADIUS_M * view.scale;
    ctx.fillStyle = agent.seated ? COLORS.agentSeated : COLORS.agent;
    ctx.beginPath();
    ctx.arc(sx, sy, radius, 0, Math.PI * 2);
    ctx.fill();
    if (agent.seated) {
      ctx.strokeStyle = COLORS.text;
      ctx.lineWidth = 1;
      ctx.strokeRect(sx - radius, sy - radius, radius * 2, radius * 2);
    }
    // Heading notch from centre to rim.
    const hx = sx + radius * Math.cos(agent.orientation);
    const hy = sy - radius * Math.sin(agent.orientation);
    ctx.strokeStyle = COLORS.background;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(sx, sy);
    ctx.lineTo(hx, hy);
    ctx.stroke();
    if (agent.speaking) {
      ctx.strokeStyle = COLORS.speaking;
      ctx.lineWidth = 1.5;
      for (const ring of [1.5, 2.0]) {
        ctx.beginPath();
        ctx.arc(sx, sy, radius * ring, -0.6, 0.6);
        ctx.stroke();
      }
    }
    if (opts.selectedAgent === agent.id) {
      const hp = view.worldToScreen(handlePosition(agent));
      ctx.strokeStyle = COLORS.handle;
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(sx, sy);
      ctx.lineTo(hp[0], hp[1]);
      ctx.stroke();
      ctx.fillStyle = COLORS.handle;
      ctx.beginPath();
      ctx.arc(hp[0], hp[1], HANDLE_RADIUS_M * view.scale, 0, Math.PI * 2);
      ctx.fill();
    }
    ctx.fillStyle = COLORS.text;
    ctx.font = "12px sans-serif";
    ctx.fillText(agent.id, sx + radius + 3, sy + 4);
  }
}

function drawRobot(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  frame: SceneFrame,
): void {
  const [x, y, theta] = frame.robot.pose;
  const [sx, sy] = view.worldToScreen([x, y]);
  const size = Math.max(0.22 * view.scale, 6);
  ctx.save();
  ctx.translate(sx, sy);
  ctx.rotate(-theta);
  ctx.fillStyle = COLORS.robot;
  ctx.beginPath();
  ctx.moveTo(size, 0);
  ctx.lineTo(-size * 0.7, size * 0.6);
  ctx.lineTo(-size * 0.7, -size * 0.6);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
  if (frame.robot.speaking) {
    ctx.strokeStyle = COLORS.speaking;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(sx, sy, size * 1.8, 0, Math.PI * 2);
    ctx.stroke();
  }
}

function drawGoal(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  frame: SceneFrame,
): void {
  if (!frame.robot.goal) return;
  const [sx, sy] = view.worldToScreen(frame.robot.goal);
  const r = Math.max(0.15 * view.scale, 5);
  ctx.strokeStyle = COLORS.goal;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(sx, sy, r, 0, Math.PI * 2);
  ctx.moveTo(sx - r * 1.6, sy);
  ctx.lineTo(sx + r * 1.6, sy);
  ctx.moveTo(sx, sy - r * 1.6);
  ctx.lineTo(sx, sy + r * 1.6);
  ctx.stroke();
}

function drawHud(
  ctx: CanvasRenderingContext2D,
  view: Viewport,
  frame: SceneFrame,
): void {
  ctx.fillStyle = COLORS.text;
  ctx.font = "12px sans-serif";
  const phase = frame.supervisor.phase;
  const target = frame.supervisor.target;
  const badge = target ? `${phase} -> ${target}` : phase;
  ctx.fillText(`supervisor: ${badge}`, 10, 18);
  ctx.fillText(`t=${frame.time.toFixed(1)}s  tick=${frame.tick}`, 10, 34);

  const bar = scaleReadout(view.scale);
  const y = view.height - 14;
  ctx.strokeStyle = COLORS.text;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(10, y);
  ctx.lineTo(10 + bar.pixels, y);
  ctx.stroke();
  ctx.fillText(bar.label, 14 + bar.pixels, y + 4);
}
