/** Hit-testing for pointer gestures on the scene canvas.

Agents are grabbed by a disc around their position, orientation by a
small handle floating ahead of the body, and the navigation goal by its
marker.  Grab radii are specified in metres but padded in pixels so
targets stay clickable when zoomed far out.
*/

import type { AgentInfo, SceneFrame, Vec2 } from "./types.js";
import type { Viewport } from "./viewport.js";

export const AGENT_RADIUS_M = 0.25;
export const HANDLE_DISTANCE_M = 0.45;
export const HANDLE_RADIUS_M = 0.12;
export const GOAL_RADIUS_M = 0.2;

/** Minimum effective grab radius on screen, in pixels. */
const MIN_GRAB_PX = 8;

export type PickTarget =
  | { kind: "handle"; agent: string }
  | { kind: "agent"; agent: string }
  | { kind: "goal" }
  | null;

export function handlePosition(agent: AgentInfo): Vec2 {
  return [
    agent.pos[0] + HANDLE_DISTANCE_M * Math.cos(agent.orientation),
    agent.pos[1] + HANDLE_DISTANCE_M * Math.sin(agent.orientation),
  ];
}

function withinPx(
  view: Viewport,
  world: Vec2,
  target: Vec2,
  radiusM: number,
): boolean {
  const dx = world[0] - target[0];
  const dy = world[1] - target[1];
  const distPx = Math.hypot(dx, dy) * view.scale;
  const grabPx = Math.max(radiusM * view.scale, MIN_GRAB_PX);
  return distPx <= grabPx;
}

/** Resolve what a pointer-down at `world` grabs, handles before bodies. */
export function pick(frame: SceneFrame, view: Viewport, world: Vec2): PickTarget {
  for (const agent of frame.agents) {
    if (withinPx(view, world, handlePosition(agent), HANDLE_RADIUS_M)) {
      return { kind: "handle", agent: agent.id };
    }
  }
  let best: AgentInfo | null = null;
  let bestDist = Infinity;
  for (const agent of frame.agents) {
    if (!withinPx(view, world, agent.pos, AGENT_RADIUS_M)) continue;
    const d = Math.hypot(world[0] - agent.pos[0], world[1] - agent.pos[1]);
    if (d < bestDist) {
      best = agent;
      bestDist = d;
    }
  }
  if (best) return { kind: "agent", agent: best.id };
  if (frame.robot.goal && withinPx(view, world, frame.robot.goal, GOAL_RADIUS_M)) {
    return { kind: "goal" };
  }
  return null;
}

/** Orientation implied by dragging a handle: agent looks toward the cursor. */
export function orientationFromDrag(agentPos: Vec2, cursor: Vec2): number {
  return Math.atan2(cursor[1] - agentPos[1], cursor[0] - agentPos[0]);
}
