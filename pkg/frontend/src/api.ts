/**
 * Typed client for the engine service.
 *
 * Every mutating call carries the caller's last-seen revision; a 409
 * surfaces as ApiError with code "conflict" so the UI can snap back and
 * re-sync. Error bodies are always the service's error document.
 */

import type {
  ApiErrorDoc,
  BreakdownDoc,
  BreakdownOptionsDoc,
  EditDoc,
  FrameDoc,
  ItemEditDoc,
  ProjectDoc,
  TimelineDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly code: ApiErrorDoc["code"];
  readonly status: number;
  readonly detail: Record<string, unknown>;

  constructor(status: number, doc: ApiErrorDoc) {
    super(doc.message);
    this.name = "ApiError";
    this.status = status;
    this.code = doc.code;
    this.detail = doc.detail ?? {};
  }
}

export interface Revisioned<T> {
  revision: number;
  value: T;
}

async function parseError(response: Response): Promise<never> {
  let doc: ApiErrorDoc;
  try {
    doc = (await response.json()) as ApiErrorDoc;
  } catch {
    doc = { code: "internal", message: `HTTP ${response.status}`, detail: {} };
  }
  throw new ApiError(response.status, doc);
}

export class Client {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async requestJson<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      await parseError(response);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    return (await response.json()) as T;
  }

  private async requestText(path: string): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, { method: "GET" });
    if (!response.ok) {
      await parseError(response);
    }
    return await response.text();
  }

  async health(): Promise<boolean> {
    try {
      const doc = await this.requestJson<{ status: string }>("GET", "/healthz");
      return doc.status === "ok";
    } catch {
      return false;
    }
  }

  async createProject(script: string): Promise<Revisioned<ProjectDoc>> {
    const doc = await this.requestJson<{ revision: number; project: ProjectDoc }>("POST", "/projects", {
      script,
    });
    return { revision: doc.revision, value: doc.project };
  }

  async getProject(id: string): Promise<Revisioned<ProjectDoc>> {
    const doc = await this.requestJson<{ revision: number; project: ProjectDoc }>(
      "GET",
      `/projects/${encodeURIComponent(id)}`,
    );
    return { revision: doc.revision, value: doc.project };
  }

  async deleteProject(id: string, revision?: number): Promise<void> {
    const suffix = revision === undefined ? "" : `?revision=${revision}`;
    await this.requestJson<void>("DELETE", `/projects/${encodeURIComponent(id)}${suffix}`);
  }

  async runBreakdown(
    id: string,
    revision: number,
    options?: BreakdownOptionsDoc,
  ): Promise<Revisioned<BreakdownDoc>> {
    const doc = await this.requestJson<{ revision: number; breakdown: BreakdownDoc }>(
      "POST",
      `/projects/${encodeURIComponent(id)}/breakdown`,
      { options: options ?? null, revision },
    );
    return { revision: doc.revision, value: doc.breakdown };
  }

  async regenerateBreakdown(
    id: string,
    revision: number,
    edits: ItemEditDoc[],
  ): Promise<Revisioned<BreakdownDoc>> {
    const doc = await this.requestJson<{ revision: number; breakdown: BreakdownDoc }>(
      "POST",
      `/projects/${encodeURIComponent(id)}/breakdown/regenerate`,
      { edits, revision },
    );
    return { revision: doc.revision, value: doc.breakdown };
  }

  async research(id: string, revision: number): Promise<Revisioned<ProjectDoc>> {
    const doc = await this.requestJson<{ revision: number; project: ProjectDoc }>(
      "POST",
      `/projects/${encodeURIComponent(id)}/research`,
      { revision },
    );
    return { revision: doc.revision, value: doc.project };
  }

  async chat(
    id: string,
    blockId: string,
    revision: number,
    message: string,
  ): Promise<{ revision: number; reply: string; updated: Record<string, unknown> | null }> {
    return await this.requestJson("POST", `/projects/${encodeURIComponent(id)}/blocks/${encodeURIComponent(blockId)}/chat`, {
      message,
      revision,
    });
  }

  async compile(
    id: string,
    revision: number,
    options?: BreakdownOptionsDoc,
  ): Promise<Revisioned<TimelineDoc>> {
    const doc = await this.requestJson<{ revision: number; timeline: TimelineDoc }>(
      "POST",
      `/projects/${encodeURIComponent(id)}/compile`,
      { options: options ?? null, revision },
    );
    return { revision: doc.revision, value: doc.timeline };
  }

  async editTimeline(id: string, revision: number, edit: EditDoc): Promise<Revisioned<TimelineDoc>> {
    const doc = await this.requestJson<{ revision: number; timeline: TimelineDoc }>(
      "PUT",
      `/projects/${encodeURIComponent(id)}/timeline`,
      { edit, revision },
    );
    return { revision: doc.revision, value: doc.timeline };
  }

  async frame(id: string, t: number): Promise<FrameDoc> {
    return await this.requestJson<FrameDoc>("GET", `/projects/${encodeURIComponent(id)}/frame?t=${t}`);
  }

  /** Raw canonical frame bytes, for exact comparison with stream lines. */
  async frameRaw(id: string, t: number): Promise<string> {
    return await this.requestText(`/projects/${encodeURIComponent(id)}/frame?t=${t}`);
  }

  /** Newline-delimited canonical frame stream. */
  async frameStream(id: string, fps: number): Promise<string> {
    return await this.requestText(`/projects/${encodeURIComponent(id)}/frames?fps=${fps}`);
  }

  /** Full canonical project document (export endpoint), raw bytes. */
  async exportRaw(id: string): Promise<string> {
    return await this.requestText(`/projects/${encodeURIComponent(id)}/export`);
  }

  async uploadAsset(data: Blob | ArrayBuffer): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/assets`, { method: "POST", body: data });
    if (!response.ok) {
      await parseError(response);
    }
    const doc = (await response.json()) as { asset_id: string };
    return doc.asset_id;
  }

  assetUrl(assetId: string): string {
    return `${this.baseUrl}/assets/${encodeURIComponent(assetId)}`;
  }
}
