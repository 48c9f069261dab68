/**
 * HTTP transport for the editing service.
 *
 * One base URL is the only configuration. Error responses carry
 * `{"detail": "..."}`; that detail (plus the status) is surfaced as an
 * ApiError so the UI can toast it verbatim.
 */

import type {
  CreateSessionBody,
  EditKind,
  SessionDocument,
  Transport,
} from "./state.js";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

const B64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

/** Plain base64 for binary payloads; works the same in browser and node. */
export function bytesToBase64(bytes: Uint8Array): string {
  let out = "";
  for (let i = 0; i < bytes.length; i += 3) {
    const a = bytes[i];
    const b = i + 1 < bytes.length ? bytes[i + 1] : 0;
    const c = i + 2 < bytes.length ? bytes[i + 2] : 0;
    out += B64[a >> 2];
    out += B64[((a & 0x03) << 4) | (b >> 4)];
    out += i + 1 < bytes.length ? B64[((b & 0x0f) << 2) | (c >> 6)] : "=";
    out += i + 2 < bytes.length ? B64[c & 0x3f] : "=";
  }
  return out;
}

export class HttpTransport implements Transport {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText || "request failed";
      try {
        const body = await response.json();
        if (typeof body?.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  createSession(body: CreateSessionBody): Promise<SessionDocument> {
    return this.json("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getSession(id: string): Promise<SessionDocument> {
    return this.json(`/sessions/${id}`);
  }

  async getMeshObj(id: string): Promise<string> {
    const response = await this.request(`/sessions/${id}/mesh.obj`);
    return response.text();
  }

  async getSketchPng(id: string): Promise<Uint8Array> {
    const response = await this.request(`/sessions/${id}/sketch.png`);
    return new Uint8Array(await response.arrayBuffer());
  }

  submitEdit(id: string, kind: EditKind, sketchPng: Uint8Array): Promise<SessionDocument> {
    return this.json(`/sessions/${id}/edits`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ kind, sketch_png_base64: bytesToBase64(sketchPng) }),
    });
  }

  undo(id: string): Promise<SessionDocument> {
    return this.json(`/sessions/${id}/undo`, { method: "POST" });
  }
}
