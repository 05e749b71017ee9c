// Thin client over the annotation service JSON API. The fetch function is
// injectable so tests can run without a server.

import type { AnnotationEvent, EventsDocument, VideoInfo } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export type SaveResult =
  | { ok: true; doc: EventsDocument }
  | { ok: false; status: number; errors: string[] };

function detailMessages(body: unknown): string[] {
  if (body && typeof body === "object" && Array.isArray((body as any).detail)) {
    return (body as any).detail.map((item: any) =>
      typeof item === "string" ? item : `${(item.loc ?? []).join(".")}: ${item.msg}`,
    );
  }
  return ["save rejected by the server"];
}

export class AnnotationApi {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async listVideos(): Promise<VideoInfo[]> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/videos`);
    if (!resp.ok) throw new Error(`video listing failed: HTTP ${resp.status}`);
    return (await resp.json()) as VideoInfo[];
  }

  frameUrl(videoId: string, frame: number): string {
    return `${this.baseUrl}/api/videos/${encodeURIComponent(videoId)}/frames/${frame}`;
  }

  async getEvents(videoId: string): Promise<EventsDocument> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/api/videos/${encodeURIComponent(videoId)}/events`,
    );
    if (!resp.ok) throw new Error(`event fetch failed: HTTP ${resp.status}`);
    return (await resp.json()) as EventsDocument;
  }

  async putEvents(
    videoId: string,
    fps: number,
    events: AnnotationEvent[],
  ): Promise<SaveResult> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/api/videos/${encodeURIComponent(videoId)}/events`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ video_id: videoId, fps, events }),
      },
    );
    if (resp.ok) {
      return { ok: true, doc: (await resp.json()) as EventsDocument };
    }
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      // non-JSON error body; fall through to the generic message
    }
    return { ok: false, status: resp.status, errors: detailMessages(body) };
  }
}
