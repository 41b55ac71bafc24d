/** Frame stream over the playground websocket.

The server pushes one JSON frame per tick (plus one on connect and on
reset).  The stream parses each message, hands it to the consumer in
arrival order, and reconnects with a fixed delay when the connection
drops, unless the consumer called stop().
*/

import type { SceneFrame } from "./types.js";

export interface WsLike {
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;

export interface FrameStreamOptions {
  reconnectDelayMs?: number;
  wsFactory?: WsFactory;
  /** Scheduler hook so tests can trigger reconnects synchronously. */
  schedule?: (fn: () => void, delayMs: number) => void;
}

export class FrameStream {
  private readonly url: string;
  private readonly onFrame: (frame: SceneFrame) => void;
  private readonly wsFactory: WsFactory;
  private readonly schedule: (fn: () => void, delayMs: number) => void;
  private readonly reconnectDelayMs: number;
  private ws: WsLike | null = null;
  private stopped = false;
  reconnects = 0;

  constructor(
    url: string,
    onFrame: (frame: SceneFrame) => void,
    options: FrameStreamOptions = {},
  ) {
    this.url = url;
    this.onFrame = onFrame;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    this.wsFactory =
      options.wsFactory ??
      ((u) => new WebSocket(u) as unknown as WsLike);
    this.schedule =
      options.schedule ?? ((fn, delay) => setTimeout(fn, delay));
  }

  start(): void {
    if (this.stopped) return;
    const ws = this.wsFactory(this.url);
    this.ws = ws;
    ws.onmessage = (ev) => {
      if (typeof ev.data !== "string") return;
      let frame: SceneFrame;
      try {
        frame = JSON.parse(ev.data) as SceneFrame;
      } catch {
        return;
      }
      this.onFrame(frame);
    };
    const retry = () => {
      if (this.stopped || this.ws !== ws) return;
      this.ws = null;
      this.reconnects += 1;
      this.schedule(() => this.start(), this.reconnectDelayMs);
    };
    ws.onclose = retry;
    ws.onerror = retry;
  }

  stop(): void {
    this.stopped = true;
    const ws = this.ws;
    this.ws = null;
    if (ws) {
      ws.onclose = null;
      ws.onerror = null;
      ws.close();
    }
  }
}
