/** Client-side scene state: latest frame, optimistic edits, field cache.

Edits are applied to the canvas immediately so dragging feels live, then
reconciled against the simulator: the server acks an edit with the tick
it was queued at, and the first frame strictly past that tick reflects
it, at which point the local overlay is dropped.  Frames only move the
clock forward, except tick 0 which signals a reset.
*/

import type {
  AgentInfo,
  Edit,
  FieldLayer,
  FieldPayload,
  SceneFrame,
} from "./types.js";

interface PendingEdit {
  id: number;
  edit: Edit;
  /** Tick the server queued the edit at; null until the ack lands. */
  appliesAtTick: number | null;
}

export type Listener = () => void;

export class SceneStore {
  private frame: SceneFrame | null = null;
  private pending: PendingEdit[] = [];
  private nextEditId = 1;
  private fields = new Map<FieldLayer, FieldPayload>();
  private listeners = new Set<Listener>();

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Latest raw server frame, without optimistic overlays. */
  latest(): SceneFrame | null {
    return this.frame;
  }

  applyFrame(frame: SceneFrame): boolean {
    const current = this.frame;
    const isReset = frame.tick === 0 && current !== null && current.tick > 0;
    if (current && frame.tick < current.tick && !isReset) {
      return false;
    }
    if (isReset) {
      this.pending = [];
    } else {
      this.pending = this.pending.filter(
        (p) => p.appliesAtTick === null || frame.tick <= p.appliesAtTick,
      );
    }
    this.frame = frame;
    if (frame.field) {
      this.setField(frame.field);
    }
    this.notify();
    return true;
  }

  addOptimistic(edit: Edit): number {
    const id = this.nextEditId++;
    this.pending.push({ id, edit, appliesAtTick: null });
    this.notify();
    return id;
  }

  /** Replace a pending edit in place, e.g. while a drag is still moving. */
  updateOptimistic(id: number, edit: Edit): void {
    const entry = this.pending.find((p) => p.id === id);
    if (entry) {
      entry.edit = edit;
      this.notify();
    }
  }

  ackOptimistic(id: number, appliesAtTick: number): void {
    const entry = this.pending.find((p) => p.id === id);
    if (entry) {
      entry.appliesAtTick = appliesAtTick;
      this.notify();
    }
  }

  dropOptimistic(id: number): void {
    const before = this.pending.length;
    this.pending = this.pending.filter((p) => p.id !== id);
    if (this.pending.length !== before) this.notify();
  }

  pendingCount(): number {
    return this.pending.length;
  }

  /** Latest frame with optimistic edits overlaid, ready to render. */
  view(): SceneFrame | null {
    if (!this.frame) return null;
    if (this.pending.length === 0) return this.frame;
    const agents = this.frame.agents.map((a) => ({ ...a }));
    const robot = { ...this.frame.robot };
    const byId = new Map<string, AgentInfo>(agents.map((a) => [a.id, a]));
    for (const { edit } of this.pending) {
      switch (edit.op) {
        case "move": {
          const agent = byId.get(edit.agent);
          if (agent) agent.pos = [edit.pos[0], edit.pos[1]];
          break;
        }
        case "set_orientation": {
          const agent = byId.get(edit.agent);
          if (agent) agent.orientation = edit.orientation;
          break;
        }
        case "set_seated": {
          const agent = byId.get(edit.agent);
          if (agent) agent.seated = edit.seated;
          break;
        }
        case "set_speaking": {
          const agent = byId.get(edit.agent);
          if (agent) agent.speaking = edit.speaking;
          break;
        }
        case "add": {
          if (!byId.has(edit.agent)) {
            const added: AgentInfo = {
              id: edit.agent,
              pos: [edit.pos[0], edit.pos[1]],
              orientation: edit.orientation ?? 0,
              seated: edit.seated ?? false,
              speaking: edit.speaking ?? false,
            };
            agents.push(added);
            byId.set(added.id, added);
          }
          break;
        }
        case "remove": {
          const idx = agents.findIndex((a) => a.id === edit.agent);
          if (idx >= 0) {
            agents.splice(idx, 1);
            byId.delete(edit.agent);
          }
          break;
        }
        case "move_goal": {
          robot.goal = [edit.goal[0], edit.goal[1]];
          break;
        }
      }
    }
    return { ...this.frame, agents, robot };
  }

  setField(field: FieldPayload): void {
    const cached = this.fields.get(field.layer);
    if (cached && cached.version === field.version) return;
    this.fields.set(field.layer, field);
    this.notify();
  }

  getField(layer: FieldLayer): FieldPayload | null {
    return this.fields.get(layer) ?? null;
  }
}
