// Pure session-state transitions. The DOM layer only dispatches these and
// renders the result, which keeps every rule unit-testable.

import type { AnnotationEvent, Gesture, SessionState, VideoInfo } from "./types.js";

export function newSession(video: VideoInfo): SessionState {
  return {
    videoId: video.video_id,
    frameCount: video.frame_count,
    fps: video.fps,
    playbackFps: video.fps,
    currentFrame: 0,
    playing: false,
    pendingStart: null,
    selectedGesture: "tongue_out",
    events: [],
    dirty: false,
  };
}

function clampFrame(state: SessionState, frame: number): number {
  return Math.min(Math.max(Math.round(frame), 0), state.frameCount - 1);
}

export function seek(state: SessionState, frame: number): SessionState {
  return { ...state, currentFrame: clampFrame(state, frame) };
}

export function stepFrames(state: SessionState, delta: number): SessionState {
  return seek(state, state.currentFrame + delta);
}

export function play(state: SessionState): SessionState {
  return { ...state, playing: true };
}

export function pause(state: SessionState): SessionState {
  return { ...state, playing: false };
}

export function togglePlay(state: SessionState): SessionState {
  return state.playing ? pause(state) : play(state);
}

/** One playback step: advance a frame, stop on the last one. */
export function tick(state: SessionState): SessionState {
  if (!state.playing) return state;
  if (state.currentFrame >= state.frameCount - 1) {
    return { ...state, playing: false };
  }
  return { ...state, currentFrame: state.currentFrame + 1 };
}

export function selectGesture(state: SessionState, gesture: Gesture): SessionState {
  return { ...state, selectedGesture: gesture };
}

export function frameTime(state: SessionState, frame: number): number {
  return frame / state.fps;
}

export function makeEvent(
  state: SessionState,
  gesture: Gesture,
  startFrame: number,
  endFrame: number,
): AnnotationEvent {
  return {
    gesture,
    start_frame: startFrame,
    end_frame: endFrame,
    start_time_s: frameTime(state, startFrame),
    end_time_s: frameTime(state, endFrame),
  };
}

export function markStart(state: SessionState): SessionState {
  return { ...state, pendingStart: state.currentFrame };
}

export type MarkEndResult =
  | { kind: "committed"; state: SessionState }
  | { kind: "needs-swap"; start: number; end: number }
  | { kind: "error"; message: string };

export function markEnd(state: SessionState): MarkEndResult {
  if (state.pendingStart === null) {
    return { kind: "error", message: "Mark a start frame first (S)" };
  }
  const start = state.pendingStart;
  const end = state.currentFrame;
  if (end < start) {
    // The caller confirms before committing the swapped interval.
    return { kind: "needs-swap", start: end, end: start };
  }
  return { kind: "committed", state: commitEvent(state, start, end) };
}

export function commitEvent(
  state: SessionState,
  startFrame: number,
  endFrame: number,
): SessionState {
  const event = makeEvent(state, state.selectedGesture, startFrame, endFrame);
  return {
    ...state,
    events: [...state.events, event],
    pendingStart: null,
    dirty: true,
  };
}

export function deleteEvent(state: SessionState, index: number): SessionState {
  if (index < 0 || index >= state.events.length) return state;
  const events = state.events.filter((_, i) => i !== index);
  return { ...state, events, dirty: true };
}

/** Server document becomes the local truth after a successful save or load. */
export function adoptServerEvents(
  state: SessionState,
  events: AnnotationEvent[],
): SessionState {
  return { ...state, events: [...events], dirty: false };
}

/** Mirror of the server-side rules, checked before any save attempt. */
export function validateEvents(state: SessionState): string[] {
  const problems: string[] = [];
  state.events.forEach((e, i) => {
    if (e.start_frame < 0 || e.end_frame >= state.frameCount) {
      problems.push(`event ${i}: outside 0..${state.frameCount - 1}`);
    }
    if (e.start_frame > e.end_frame) {
      problems.push(`event ${i}: start ${e.start_frame} after end ${e.end_frame}`);
    }
  });
  for (const gesture of new Set(state.events.map((e) => e.gesture))) {
    const sorted = state.events
      .filter((e) => e.gesture === gesture)
      .sort((a, b) => a.start_frame - b.start_frame);
    for (let i = 1; i < sorted.length; i++) {
      if (sorted[i].start_frame <= sorted[i - 1].end_frame) {
        problems.push(
          `overlapping ${gesture} events at frames ` +
            `${sorted[i - 1].start_frame}-${sorted[i - 1].end_frame} and ` +
            `${sorted[i].start_frame}-${sorted[i].end_frame}`,
        );
      }
    }
  }
  return problems;
}
