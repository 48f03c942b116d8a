import type {
  GenerationParams,
  Linkage,
  Outline,
  OutlineDiff,
  OverviewCard,
  SessionView,
  Slide,
} from "./types";

export type SlideEdit =
  | { kind: "rename"; title: string }
  | { kind: "edit_bullet"; index: number; text: string }
  | { kind: "reorder"; to_index: number }
  | { kind: "delete" }
  | { kind: "restore" }
  | { kind: "set_template"; template: Slide["template"] }
  | { kind: "move_box"; ref: string; x: number; y: number; w: number; h: number };

// Everything the panels need from the server; HttpApi is the real transport,
// tests substitute an in-memory implementation with the same semantics.
export interface Api {
  createSession(notebook: Uint8Array): Promise<{ session_id: string; revision: number; cards: OverviewCard[] }>;
  getSession(sessionId: string): Promise<SessionView>;
  getOverview(sessionId: string): Promise<{ revision: number; cards: OverviewCard[] }>;
  putOutline(sessionId: string, outline: Outline): Promise<{ revision: number; diff: OutlineDiff }>;
  recommend(sessionId: string, itemId: string): Promise<{ topics: string[] }>;
  generate(sessionId: string, params: GenerationParams): Promise<{ revision: number; deck: Slide[] }>;
  bindCells(sessionId: string, slideId: string, cellIds: string[], mode: "bind" | "unbind"): Promise<{ revision: number; slide: Slide }>;
  addManualSlide(sessionId: string, cellIds: string[]): Promise<{ revision: number; slide: Slide }>;
  editSlide(sessionId: string, slideId: string, edit: SlideEdit): Promise<SessionView>;
  linkage(sessionId: string, ref: string): Promise<Linkage>;
}

export class ApiRequestError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, detail: string, status: number) {
    super(detail);
    this.code = code;
    this.status = status;
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let code = "HttpError";
    let detail = response.statusText;
    try {
      const body = await response.json();
      code = body.error ?? code;
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiRequestError(code, detail, response.status);
  }
  return response.json() as Promise<T>;
}

export class HttpApi implements Api {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private json<T>(method: string, path: string, body?: unknown): Promise<T> {
    return this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    }).then((r) => unwrap<T>(r));
  }

  createSession(notebook: Uint8Array) {
    return this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/octet-stream" },
      body: notebook.buffer.slice(
        notebook.byteOffset,
        notebook.byteOffset + notebook.byteLength,
      ) as ArrayBuffer,
    }).then((r) => unwrap<{ session_id: string; revision: number; cards: OverviewCard[] }>(r));
  }

  getSession(sessionId: string) {
    return this.json<SessionView>("GET", `/sessions/${sessionId}`);
  }

  getOverview(sessionId: string) {
    return this.json<{ revision: number; cards: OverviewCard[] }>(
      "GET",
      `/sessions/${sessionId}/overview`,
    );
  }

  putOutline(sessionId: string, outline: Outline) {
    return this.json<{ revision: number; diff: OutlineDiff }>(
      "PUT",
      `/sessions/${sessionId}/outline`,
      outline,
    );
  }

  recommend(sessionId: string, itemId: string) {
    return this.json<{ topics: string[] }>("POST", `/sessions/${sessionId}/recommend`, {
      item_id: itemId,
    });
  }

  generate(sessionId: string, params: import("./types").GenerationParams) {
    return this.json<{ revision: number; deck: Slide[] }>(
      "POST",
      `/sessions/${sessionId}/generate`,
      params,
    );
  }

  bindCells(sessionId: string, slideId: string, cellIds: string[], mode: "bind" | "unbind") {
    return this.json<{ revision: number; slide: Slide }>(
      "POST",
      `/sessions/${sessionId}/slides/${slideId}/cells`,
      { cell_ids: cellIds, mode },
    );
  }

  addManualSlide(sessionId: string, cellIds: string[]) {
    return this.json<{ revision: number; slide: Slide }>(
      "POST",
      `/sessions/${sessionId}/slides:manual`,
      { cell_ids: cellIds },
    );
  }

  editSlide(sessionId: string, slideId: string, edit: SlideEdit) {
    return this.json<SessionView>("PATCH", `/sessions/${sessionId}/slides/${slideId}`, { edit });
  }

  linkage(sessionId: string, ref: string) {
    return this.json<Linkage>(
      "GET",
      `/sessions/${sessionId}/linkage?ref=${encodeURIComponent(ref)}`,
    );
  }
}
