/** Thin HTTP client for the playground server.

Every call goes through one injectable fetch so tests can stub the
transport.  Server-side rejections surface as ApiError carrying the
status code and the JSON `detail` string when the body provides one.
*/

import type {
  ControlRequest,
  Edit,
  EditAck,
  FieldLayer,
  FieldPayload,
  ParamsEcho,
  ParamsPayload,
  SceneFrame,
  StatusPayload,
} from "./types.js";

export interface FetchResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<FetchResponseLike>;

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }

  /** A 409 means the tick loop was mid-step; the same request can be resent. */
  get retryable(): boolean {
    return this.status === 409;
  }
}

async function readDetail(res: FetchResponseLike): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (body && typeof body.detail === "string") return body.detail;
    if (body && body.detail !== undefined) return JSON.stringify(body.detail);
  } catch {
    // Non-JSON error body; fall through to the generic message.
  }
  return "request failed";
}

export class PlaygroundClient {
  readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn =
      fetchFn ?? ((url, init) => fetch(url, init) as Promise<FetchResponseLike>);
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: { method: string; headers?: Record<string, string>; body?: string } = {
      method,
    };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) {
      throw new ApiError(res.status, await readDetail(res));
    }
    return (await res.json()) as T;
  }

  getScene(): Promise<SceneFrame> {
    return this.request<SceneFrame>("GET", "/scene");
  }

  getField(layer: FieldLayer): Promise<FieldPayload> {
    return this.request<FieldPayload>("GET", `/field?layer=${layer}`);
  }

  postEdit(edit: Edit): Promise<EditAck> {
    return this.request<EditAck>("POST", "/edit", edit);
  }

  postParams(params: ParamsPayload): Promise<ParamsEcho> {
    return this.request<ParamsEcho>("POST", "/params", params);
  }

  control(req: ControlRequest): Promise<StatusPayload> {
    return this.request<StatusPayload>("POST", "/control", req);
  }

  /** Socket endpoint derived from the HTTP base URL. */
  wsUrl(): string {
    return this.baseUrl.replace(/^http/, "ws") + "/stream";
  }
}
