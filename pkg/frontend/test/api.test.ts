import { describe, expect, it } from "vitest";

import { AnnotationApi } from "../src/api.js";
import { adoptServerEvents, commitEvent, markEnd, markStart, newSession, seek } from "../src/state.js";
import type { EventsDocument } from "../src/types.js";

/** In-memory stand-in for the annotation service: stores the canonical
 * document bytes exactly like the real server (times recomputed from frames,
 * GET returns stored bytes verbatim). */
function fakeServer(fps = 30, frameCount = 100) {
  const store = new Map<string, string>();
  const fetchFn = async (input: string, init?: RequestInit): Promise<Response> => {
    const putMatch = input.match(/\/api\/videos\/([^/]+)\/events$/);
    if (putMatch && init?.method === "PUT") {
      const videoId = decodeURIComponent(putMatch[1]);
      const body = JSON.parse(String(init.body));
      const problems: unknown[] = [];
      for (const [i, e] of body.events.entries()) {
        if (e.start_frame > e.end_frame || e.end_frame >= frameCount) {
          problems.push({ loc: ["body", "events", i], msg: "invalid interval" });
        }
      }
      if (problems.length) {
        return new Response(JSON.stringify({ detail: problems }), { status: 422 });
      }
      const doc: EventsDocument = {
        video_id: videoId,
        fps,
        events: body.events.map((e: any) => ({
          gesture: e.gesture,
          start_frame: e.start_frame,
          end_frame: e.end_frame,
          start_time_s: e.start_frame / fps,
          end_time_s: e.end_frame / fps,
        })),
      };
      store.set(videoId, JSON.stringify(doc, null, 2) + "\n");
      return new Response(store.get(videoId), { status: 200 });
    }
    if (putMatch) {
      const videoId = decodeURIComponent(putMatch[1]);
      const body = store.get(videoId) ??
        JSON.stringify({ video_id: videoId, fps, events: [] }, null, 2) + "\n";
      return new Response(body, { status: 200 });
    }
    if (input.endsWith("/api/videos")) {
      return new Response(
        JSON.stringify([{ video_id: "v1", frame_count: frameCount, fps }]),
        { status: 200 },
      );
    }
    return new Response("not found", { status: 404 });
  };
  return { fetchFn, store };
}

describe("AnnotationApi", () => {
  it("lists videos", async () => {
    const api = new AnnotationApi("", fakeServer().fetchFn);
    const videos = await api.listVideos();
    expect(videos).toEqual([{ video_id: "v1", frame_count: 100, fps: 30 }]);
  });

  it("builds frame URLs", () => {
    const api = new AnnotationApi("");
    expect(api.frameUrl("v 1", 7)).toBe("/api/videos/v%201/frames/7");
  });

  it("surfaces 422 field errors without throwing", async () => {
    const api = new AnnotationApi("", fakeServer().fetchFn);
    const result = await api.putEvents("v1", 30, [
      { gesture: "tongue_out", start_frame: 20, end_frame: 10,
        start_time_s: 20 / 30, end_time_s: 10 / 30 },
    ]);
    expect(result.ok).toBe(false);
    if (result.ok) return;
    expect(result.status).toBe(422);
    expect(result.errors[0]).toContain("events");
  });
});

describe("mark-save-reload round trip", () => {
  it("reproduces the stored document byte-for-byte", async () => {
    const { fetchFn, store } = fakeServer();
    const api = new AnnotationApi("", fetchFn);

    // Mark {start 10, end 20, tongue_out} through the state machine.
    let session = newSession({ video_id: "v1", frame_count: 100, fps: 30 });
    session = markStart(seek(session, 10));
    session = seek(session, 20);
    const marked = markEnd(session);
    expect(marked.kind).toBe("committed");
    if (marked.kind !== "committed") return;

    const save = await api.putEvents("v1", 30, marked.state.events);
    expect(save.ok).toBe(true);
    if (!save.ok) return;
    const afterSave = adoptServerEvents(marked.state, save.doc.events);
    expect(afterSave.dirty).toBe(false);

    const firstBytes = store.get("v1");
    const reloaded = await api.getEvents("v1");
    expect(JSON.stringify(reloaded, null, 2) + "\n").toBe(firstBytes);
    expect(reloaded.events[0]).toMatchObject({
      gesture: "tongue_out",
      start_frame: 10,
      end_frame: 20,
    });

    // Saving the reloaded list again leaves the stored bytes unchanged.
    const resave = await api.putEvents("v1", 30, reloaded.events);
    expect(resave.ok).toBe(true);
    expect(store.get("v1")).toBe(firstBytes);
  });

  it("failed saves keep local edits", async () => {
    const { fetchFn } = fakeServer();
    const api = new AnnotationApi("", fetchFn);
    let session = newSession({ video_id: "v1", frame_count: 100, fps: 30 });
    session = commitEvent(session, 95, 99);
    session = { ...session, events: [{ ...session.events[0], end_frame: 150 }] };
    const result = await api.putEvents("v1", 30, session.events);
    expect(result.ok).toBe(false);
    expect(session.events).toHaveLength(1); // local edits untouched
  });
});
