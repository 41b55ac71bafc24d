import { describe, expect, it } from "vitest";

import { ApiError, PlaygroundClient, type FetchLike } from "../src/client.js";

interface Call {
  url: string;
  method?: string;
  body?: string;
  headers?: Record<string, string>;
}

function stubFetch(
  handler: (call: Call) => { status: number; body: unknown },
): { fetch: FetchLike; calls: Call[] } {
  const calls: Call[] = [];
  const fetch: FetchLike = async (url, init) => {
    const call: Call = { url, method: init?.method, body: init?.body, headers: init?.headers };
    calls.push(call);
    const { status, body } = handler(call);
    return {
      ok: status >= 200 && status < 300,
      status,
      json: async () => body,
    };
  };
  return { fetch, calls };
}

describe("request plumbing", () => {
  it("hits /scene with GET and returns the parsed frame", async () => {
    const { fetch, calls } = stubFetch(() => ({ status: 200, body: { tick: 4 } }));
    const client = new PlaygroundClient("http://host:8000", fetch);
    const scene = await client.getScene();
    expect(scene.tick).toBe(4);
    expect(calls[0].url).toBe("http://host:8000/scene");
    expect(calls[0].method).toBe("GET");
    expect(calls[0].body).toBeUndefined();
  });

  it("trims trailing slashes off the base url", async () => {
    const { fetch, calls } = stubFetch(() => ({ status: 200, body: {} }));
    const client = new PlaygroundClient("http://host:8000///", fetch);
    await client.getScene();
    expect(calls[0].url).toBe("http://host:8000/scene");
  });

  it("selects the field layer via query string", async () => {
    const { fetch, calls } = stubFetch(() => ({ status: 200, body: { layer: "social" } }));
    const client = new PlaygroundClient("http://host:8000", fetch);
    await client.getField("social");
    expect(calls[0].url).toBe("http://host:8000/field?layer=social");
  });

  it("serialises edits as JSON with the content-type header", async () => {
    const { fetch, calls } = stubFetch(() => ({
      status: 200,
      body: { queued: true, applies_at_tick: 7 },
    }));
    const client = new PlaygroundClient("http://host:8000", fetch);
    const ack = await client.postEdit({ op: "move", agent: "alice", pos: [2, 3] });
    expect(ack.applies_at_tick).toBe(7);
    expect(calls[0].method).toBe("POST");
    expect(calls[0].headers?.["Content-Type"]).toBe("application/json");
    expect(JSON.parse(calls[0].body!)).toEqual({ op: "move", agent: "alice", pos: [2, 3] });
  });

  it("posts param and control payloads to their endpoints", async () => {
    const { fetch, calls } = stubFetch(() => ({ status: 200, body: { tick: 0 } }));
    const client = new PlaygroundClient("http://host:8000", fetch);
    await client.postParams({ weights: { social: 14 } });
    await client.control({ action: "reset", seed: 123 });
    expect(calls[0].url).toBe("http://host:8000/params");
    expect(calls[1].url).toBe("http://host:8000/control");
    expect(JSON.parse(calls[1].body!)).toEqual({ action: "reset", seed: 123 });
  });
});

describe("error mapping", () => {
  it("raises ApiError with the server detail on 400", async () => {
    const { fetch } = stubFetch(() => ({
      status: 400,
      body: { detail: "unknown agent 'ghost'" },
    }));
    const client = new PlaygroundClient("http://host:8000", fetch);
    const err = await client
      .postEdit({ op: "remove", agent: "ghost" })
      .then(() => null, (e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(400);
    expect((err as ApiError).detail).toBe("unknown agent 'ghost'");
    expect((err as ApiError).retryable).toBe(false);
  });

  it("marks 409 conflicts as retryable", async () => {
    const { fetch } = stubFetch(() => ({
      status: 409,
      body: { detail: "tick in flight, retry" },
    }));
    const client = new PlaygroundClient("http://host:8000", fetch);
    const err = await client
      .postEdit({ op: "move_goal", goal: [0, 0] })
      .then(() => null, (e: unknown) => e);
    expect((err as ApiError).retryable).toBe(true);
  });

  it("survives an error body that is not JSON", async () => {
    const fetch: FetchLike = async () => ({
      ok: false,
      status: 500,
      json: async () => {
        throw new Error("not json");
      },
    });
    const client = new PlaygroundClient("http://host:8000", fetch);
    const err = await client.getScene().then(() => null, (e: unknown) => e);
    expect((err as ApiError).detail).toBe("request failed");
  });
});

describe("socket address", () => {
  it("derives ws:// from http:// and keeps the path", () => {
    const client = new PlaygroundClient("http://host:8000");
    expect(client.wsUrl()).toBe("ws://host:8000/stream");
  });

  it("derives wss:// from https://", () => {
    const client = new PlaygroundClient("https://host");
    expect(client.wsUrl()).toBe("wss://host/stream");
  });
});
