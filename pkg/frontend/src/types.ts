/** Payload shapes mirrored from the playground server's HTTP and socket APIs. */

export type Vec2 = [number, number];
export type Pose = [number, number, number];

export interface ScenarioEcho {
  name: string;
  map: string | null;
  seed: number;
  duration: number;
}

export interface RobotInfo {
  pose: Pose;
  goal: Vec2 | null;
  mode: "goal" | "attend";
  speaking: boolean;
}

export interface AgentInfo {
  id: string;
  pos: Vec2;
  orientation: number;
  seated: boolean;
  speaking: boolean;
}

export interface PersonInfo {
  id: string;
  face: string | null;
  body: string | null;
  voice: string | null;
}

export interface TrackInfo {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  status: string;
  orientation: number | null;
}

export interface GroupInfo {
  id: string;
  members: string[];
  center: Vec2 | null;
}

export interface PlanInfo {
  goal: Vec2;
  u1?: Vec2;
  cost?: number;
  trajectory?: Vec2[];
  stopped?: string;
}

export interface SupervisorAction {
  kind: string;
  target: string | null;
  pose: number[] | null;
  tag: string | null;
}

export interface SupervisorInfo {
  phase: string;
  target: string | null;
  actions: SupervisorAction[];
}

export type FieldLayer = "social" | "obstacle" | "total";

export interface FieldPayload {
  layer: FieldLayer;
  nx: number;
  ny: number;
  resolution: number;
  origin: Vec2;
  version: number;
  values: number[];
}

export interface SceneFrame {
  tick: number;
  time: number;
  playing: boolean;
  scenario: ScenarioEcho;
  robot: RobotInfo;
  agents: AgentInfo[];
  persons: PersonInfo[];
  tracks: TrackInfo[];
  groups: GroupInfo[];
  plan: PlanInfo | null;
  supervisor: SupervisorInfo;
  field_version: number;
  stop_events: number;
  /** Attached to socket frames whenever the field version changed. */
  field?: FieldPayload;
}

export type Edit =
  | {
      op: "add";
      agent: string;
      pos: Vec2;
      orientation?: number;
      seated?: boolean;
      speaking?: boolean;
    }
  | { op: "move"; agent: string; pos: Vec2 }
  | { op: "remove"; agent: string }
  | { op: "set_orientation"; agent: string; orientation: number }
  | { op: "set_seated"; agent: string; seated: boolean }
  | { op: "set_speaking"; agent: string; speaking: boolean }
  | { op: "move_goal"; goal: Vec2 };

export interface SocialParams {
  sigma_front: number;
  sigma_side: number;
  sigma_rear: number;
  velocity_gain: number;
  seated_scale: number;
  group_sigma: number;
  peak: number;
}

export interface PlannerWeights {
  goal: number;
  social: number;
  effort: number;
  terminal: number;
}

export interface ParamsPayload {
  social?: Partial<SocialParams>;
  weights?: Partial<PlannerWeights>;
}

export interface ParamsEcho {
  social: SocialParams;
  weights: PlannerWeights;
}

export interface StatusPayload {
  tick: number;
  time: number;
  playing: boolean;
  stop_events: number;
  field_version: number;
}

export interface EditAck {
  queued: boolean;
  applies_at_tick: number;
}

export type ControlRequest =
  | { action: "play" }
  | { action: "pause" }
  | { action: "step"; steps?: number }
  | { action: "reset"; seed?: number };
