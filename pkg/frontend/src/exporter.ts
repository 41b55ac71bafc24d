/** Turn the live scene back into a runnable scenario file.

The exported JSON freezes every agent at its current pose (one waypoint
at t=0, fixed orientation), so a tweaked layout can be replayed headless
with the batch runner.  This is the playground's only authoring feature.
*/

import type { SceneFrame } from "./types.js";

export interface ScenarioAgent {
  id: string;
  waypoints: { time: number; pos: [number, number] }[];
  orientation: { fixed: number };
  seated?: boolean;
  speech?: [number, number][];
}

export interface ScenarioDoc {
  name: string;
  map: string;
  seed: number;
  duration: number;
  robot: {
    start: [number, number, number];
    goal: [number, number] | null;
    mode: "goal" | "attend";
  };
  agents?: ScenarioAgent[];
}

/** Coerce a label into the scenario-name alphabet: ^[a-z][a-z0-9_]*$. */
export function sanitizeName(raw: string): string {
  let name = raw.toLowerCase().replace(/[^a-z0-9_]+/g, "_");
  name = name.replace(/^_+/, "").replace(/_+$/, "");
  if (!/^[a-z]/.test(name)) name = `scene_${name}`;
  return name.replace(/_+/g, "_") || "scene";
}

export function sceneToScenario(frame: SceneFrame): ScenarioDoc {
  const { scenario, robot } = frame;
  if (scenario.map === null) {
    throw new Error("scenario carries no map; cannot export");
  }
  const doc: ScenarioDoc = {
    name: sanitizeName(`${scenario.name}_edited`),
    map: scenario.map,
    seed: scenario.seed,
    duration: scenario.duration,
    robot: {
      start: [robot.pose[0], robot.pose[1], robot.pose[2]],
      goal: robot.goal ? [robot.goal[0], robot.goal[1]] : null,
      mode: robot.mode,
    },
  };
  if (frame.agents.length > 0) {
    doc.agents = frame.agents.map((agent) => {
      const out: ScenarioAgent = {
        id: agent.id,
        waypoints: [{ time: 0, pos: [agent.pos[0], agent.pos[1]] }],
        orientation: { fixed: agent.orientation },
      };
      if (agent.seated) out.seated = true;
      if (agent.speaking) out.speech = [[0, scenario.duration]];
      return out;
    });
  }
  return doc;
}

export function scenarioJson(frame: SceneFrame): string {
  return JSON.stringify(sceneToScenario(frame), null, 2) + "\n";
}
