// Thin typed client for the powlgen HTTP API. All errors surface as
// ApiError carrying the service's {kind, message, location?} body.

import type {
  ExportFormat,
  HistoryResponse,
  RenderGraph,
  SessionSummary,
  View,
} from "./types";

export class ApiError extends Error {
  readonly kind: string;
  readonly status: number;
  readonly location?: string;

  constructor(kind: string, message: string, status: number,
              location?: string) {
    super(message);
    this.name = "ApiError";
    this.kind = kind;
    this.status = status;
    this.location = location;
  }

  describe(): string {
    const where = this.location ? ` (${this.location})` : "";
    return `${this.kind}: ${this.message}${where}`;
  }
}

async function throwFromResponse(response: Response): Promise<never> {
  let kind = "http-error";
  let message = `${response.status} ${response.statusText}`;
  let location: string | undefined;
  try {
    const body = await response.json();
    if (body && typeof body.kind === "string") {
      kind = body.kind;
      message = String(body.message ?? message);
      if (typeof body.location === "string") location = body.location;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(kind, message, response.status, location);
}

export class PowlgenClient {
  constructor(readonly baseUrl: string = "") {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await fetch(this.url(path), init);
    } catch (err) {
      throw new ApiError("network", `cannot reach the service: ${err}`, 0);
    }
    if (!response.ok) await throwFromResponse(response);
    return response;
  }

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  createSession(description: string): Promise<SessionSummary> {
    return this.requestJson("/api/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ description }),
    });
  }

  sendFeedback(sessionId: string, feedback: string): Promise<SessionSummary> {
    return this.requestJson(
      `/api/sessions/${encodeURIComponent(sessionId)}/feedback`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ feedback }),
      });
  }

  fetchRenderGraph(sessionId: string, view: View): Promise<RenderGraph> {
    return this.requestJson(
      `/api/sessions/${encodeURIComponent(sessionId)}/model` +
      `?format=render-json&view=${view}`);
  }

  fetchHistory(sessionId: string,
               includeConversation = false): Promise<HistoryResponse> {
    const suffix = includeConversation ? "?include_conversation=true" : "";
    return this.requestJson(
      `/api/sessions/${encodeURIComponent(sessionId)}/history${suffix}`);
  }

  exportUrl(sessionId: string, format: ExportFormat): string {
    return this.url(
      `/api/sessions/${encodeURIComponent(sessionId)}/model?format=${format}`);
  }

  async fetchExport(sessionId: string,
                    format: ExportFormat): Promise<Uint8Array> {
    const response = await this.request(
      `/api/sessions/${encodeURIComponent(sessionId)}/model?format=${format}`);
    return new Uint8Array(await response.arrayBuffer());
  }
}
