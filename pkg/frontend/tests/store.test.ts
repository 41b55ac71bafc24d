import { describe, expect, it } from "vitest";

import { SceneStore } from "../src/store.js";
import type { FieldPayload, SceneFrame } from "../src/types.js";

function frame(tick: number, extra: Partial<SceneFrame> = {}): SceneFrame {
  return {
    tick,
    time: tick * 0.2,
    playing: false,
    scenario: { name: "s", map: "m.map", seed: 7, duration: 20 },
    robot: { pose: [0, 0, 0], goal: [4, 0], mode: "goal", speaking: false },
    agents: [
      { id: "alice", pos: [1, 1], orientation: 0, seated: false, speaking: false },
    ],
    persons: [],
    tracks: [],
    groups: [],
    plan: null,
    supervisor: { phase: "idle", target: null, actions: [] },
    field_version: 1,
    stop_events: 0,
    ...extra,
  };
}

function field(version: number, layer: FieldPayload["layer"] = "total"): FieldPayload {
  return {
    layer,
    nx: 2,
    ny: 2,
    resolution: 0.5,
    origin: [0, 0],
    version,
    values: [0, 0, 0, version],
  };
}

describe("frame ordering", () => {
  it("accepts forward frames and rejects stale ones", () => {
    const store = new SceneStore();
    expect(store.applyFrame(frame(5))).toBe(true);
    expect(store.applyFrame(frame(6))).toBe(true);
    expect(store.applyFrame(frame(4))).toBe(false);
    expect(store.latest()?.tick).toBe(6);
  });

  it("accepts tick 0 as a reset and clears optimistic edits", () => {
    const store = new SceneStore();
    store.applyFrame(frame(12));
    store.addOptimistic({ op: "move", agent: "alice", pos: [9, 9] });
    expect(store.pendingCount()).toBe(1);
    expect(store.applyFrame(frame(0))).toBe(true);
    expect(store.latest()?.tick).toBe(0);
    expect(store.pendingCount()).toBe(0);
  });

  it("notifies subscribers on accepted frames only", () => {
    const store = new SceneStore();
    let calls = 0;
    store.subscribe(() => calls++);
    store.applyFrame(frame(3));
    store.applyFrame(frame(2));
    expect(calls).toBe(1);
  });
});

describe("optimistic edits", () => {
  it("overlays a move onto the rendered view without touching the raw frame", () => {
    const store = new SceneStore();
    store.applyFrame(frame(1));
    store.addOptimistic({ op: "move", agent: "alice", pos: [3, -2] });
    expect(store.view()?.agents[0].pos).toEqual([3, -2]);
    expect(store.latest()?.agents[0].pos).toEqual([1, 1]);
  });

  it("supports orientation, flags, goal, add, and remove overlays", () => {
    const store = new SceneStore();
    store.applyFrame(frame(1));
    store.addOptimistic({ op: "set_orientation", agent: "alice", orientation: 1.5 });
    store.addOptimistic({ op: "set_seated", agent: "alice", seated: true });
    store.addOptimistic({ op: "set_speaking", agent: "alice", speaking: true });
    store.addOptimistic({ op: "move_goal", goal: [-1, -1] });
    store.addOptimistic({ op: "add", agent: "bob", pos: [0, 2] });
    const view = store.view()!;
    const alice = view.agents.find((a) => a.id === "alice")!;
    expect(alice.orientation).toBeCloseTo(1.5, 12);
    expect(alice.seated).toBe(true);
    expect(alice.speaking).toBe(true);
    expect(view.robot.goal).toEqual([-1, -1]);
    expect(view.agents.map((a) => a.id)).toContain("bob");

    store.addOptimistic({ op: "remove", agent: "alice" });
    expect(store.view()!.agents.map((a) => a.id)).toEqual(["bob"]);
  });

  it("updates a pending edit in place during a drag", () => {
    const store = new SceneStore();
    store.applyFrame(frame(1));
    const id = store.addOptimistic({ op: "move", agent: "alice", pos: [2, 2] });
    store.updateOptimistic(id, { op: "move", agent: "alice", pos: [2.6, 2.1] });
    expect(store.view()?.agents[0].pos).toEqual([2.6, 2.1]);
    expect(store.pendingCount()).toBe(1);
  });

  it("drops an acked edit once a frame past its queue tick arrives", () => {
    const store = new SceneStore();
    store.applyFrame(frame(4));
    const id = store.addOptimistic({ op: "move", agent: "alice", pos: [7, 7] });
    store.ackOptimistic(id, 4);
    // The frame computed at the queue tick itself still predates the edit.
    store.applyFrame(frame(4));
    expect(store.pendingCount()).toBe(1);
    expect(store.view()?.agents[0].pos).toEqual([7, 7]);
    // The first frame strictly past it reflects the edit server-side.
    store.applyFrame(frame(5));
    expect(store.pendingCount()).toBe(0);
    expect(store.view()?.agents[0].pos).toEqual([1, 1]);
  });

  it("keeps unacked edits alive across frames", () => {
    const store = new SceneStore();
    store.applyFrame(frame(1));
    store.addOptimistic({ op: "move", agent: "alice", pos: [7, 7] });
    store.applyFrame(frame(2));
    store.applyFrame(frame(3));
    expect(store.pendingCount()).toBe(1);
  });

  it("dropOptimistic snaps the view back", () => {
    const store = new SceneStore();
    store.applyFrame(frame(1));
    const id = store.addOptimistic({ op: "move", agent: "alice", pos: [7, 7] });
    store.dropOptimistic(id);
    expect(store.view()?.agents[0].pos).toEqual([1, 1]);
    expect(store.pendingCount()).toBe(0);
  });
});

describe("field cache", () => {
  it("keeps one payload per layer keyed by version", () => {
    const store = new SceneStore();
    store.setField(field(1, "total"));
    store.setField(field(1, "social"));
    expect(store.getField("total")?.version).toBe(1);
    expect(store.getField("social")?.version).toBe(1);
    expect(store.getField("obstacle")).toBeNull();

    store.setField(field(3, "total"));
    expect(store.getField("total")?.version).toBe(3);
    expect(store.getField("social")?.version).toBe(1);
  });

  it("absorbs the field attached to a socket frame", () => {
    const store = new SceneStore();
    store.applyFrame(frame(2, { field: field(9) }));
    expect(store.getField("total")?.version).toBe(9);
  });

  it("ignores a duplicate version instead of re-notifying", () => {
    const store = new SceneStore();
    store.setField(field(2));
    let calls = 0;
    store.subscribe(() => calls++);
    store.setField(field(2));
    expect(calls).toBe(0);
  });
});
