// DOM wiring for the annotation tool. All state transitions live in
// state.ts; this file renders SessionState and forwards user intents.

import { AnnotationApi } from "./api.js";
import { bindShortcuts, type ShortcutAction } from "./keyboard.js";
import { FramePlayer } from "./player.js";
import {
  adoptServerEvents,
  commitEvent,
  deleteEvent,
  frameTime,
  markEnd,
  markStart,
  newSession,
  pause,
  seek,
  selectGesture,
  stepFrames,
  tick,
  togglePlay,
  validateEvents,
} from "./state.js";
import { GESTURES, type Gesture, type SessionState, type VideoInfo } from "./types.js";

const api = new AnnotationApi();

let state: SessionState | null = null;
let videos: VideoInfo[] = [];

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const videoSelect = $<HTMLSelectElement>("video-select");
const gestureSelect = $<HTMLSelectElement>("gesture-select");
const frameImage = $<HTMLImageElement>("frame-image");
const frameSlider = $<HTMLInputElement>("frame-slider");
const frameLabel = $<HTMLSpanElement>("frame-label");
const playButton = $<HTMLButtonElement>("play-button");
const markStartButton = $<HTMLButtonElement>("mark-start-button");
const markEndButton = $<HTMLButtonElement>("mark-end-button");
const saveButton = $<HTMLButtonElement>("save-button");
const pendingLabel = $<HTMLSpanElement>("pending-label");
const eventsBody = $<HTMLTableSectionElement>("events-body");
const statusLine = $<HTMLParagraphElement>("status-line");

const player = new FramePlayer(() => {
  if (!state) return;
  update(tick(state));
});

function toast(message: string, isError = false): void {
  statusLine.textContent = message;
  statusLine.className = isError ? "status error" : "status";
}

function fmtTime(seconds: number): string {
  return `${seconds.toFixed(3)}s`;
}

function render(): void {
  if (!state) return;
  frameImage.src = api.frameUrl(state.videoId, state.currentFrame);
  frameSlider.max = String(state.frameCount - 1);
  frameSlider.value = String(state.currentFrame);
  frameLabel.textContent =
    `frame ${state.currentFrame} / ${state.frameCount - 1}` +
    ` (${fmtTime(frameTime(state, state.currentFrame))})`;
  playButton.textContent = state.playing ? "Pause (space)" : "Play (space)";
  pendingLabel.textContent =
    state.pendingStart === null ? "" : `start marked at frame ${state.pendingStart}`;
  saveButton.disabled = !state.dirty;
  document.title = `${state.dirty ? "* " : ""}${state.videoId} - annotator`;

  eventsBody.replaceChildren(
    ...state.events.map((event, index) => {
      const row = document.createElement("tr");
      const cells = [
        event.gesture,
        `${event.start_frame} (${fmtTime(event.start_time_s)})`,
        `${event.end_frame} (${fmtTime(event.end_time_s)})`,
      ];
      for (const text of cells) {
        const td = document.createElement("td");
        td.textContent = text;
        row.appendChild(td);
      }
      const td = document.createElement("td");
      const button = document.createElement("button");
      button.textContent = "delete";
      button.addEventListener("click", () => {
        if (!state) return;
        update(deleteEvent(state, index));
      });
      td.appendChild(button);
      row.appendChild(td);
      return row;
    }),
  );
}

function update(next: SessionState): void {
  const wasPlaying = state?.playing ?? false;
  state = next;
  if (next.playing && !player.running) player.start(next.playbackFps);
  if (!next.playing && (player.running || wasPlaying)) player.stop();
  render();
}

function handleMarkEnd(): void {
  if (!state) return;
  const result = markEnd(state);
  if (result.kind === "error") {
    toast(result.message, true);
    return;
  }
  if (result.kind === "needs-swap") {
    const ok = window.confirm(
      `End frame ${result.start} precedes the marked start. ` +
        `Save the interval as [${result.start}, ${result.end}] instead?`,
    );
    if (!ok) return;
    update(commitEvent(state, result.start, result.end));
  } else {
    update(result.state);
  }
}

async function save(): Promise<void> {
  if (!state) return;
  const problems = validateEvents(state);
  if (problems.length) {
    toast(`fix before saving: ${problems.join("; ")}`, true);
    return;
  }
  const result = await api.putEvents(state.videoId, state.fps, state.events);
  if (result.ok) {
    update(adoptServerEvents(state, result.doc.events));
    toast(`saved ${result.doc.events.length} event(s)`);
  } else {
    toast(`server rejected the save: ${result.errors.join("; ")}`, true);
  }
}

async function openVideo(video: VideoInfo): Promise<void> {
  const session = newSession(video);
  const doc = await api.getEvents(video.video_id);
  update(adoptServerEvents(session, doc.events));
  toast(`loaded ${video.video_id}: ${doc.events.length} event(s)`);
}

function confirmDiscard(): boolean {
  if (state?.dirty) {
    return window.confirm("Unsaved events will be lost. Continue?");
  }
  return true;
}

function onShortcut(action: ShortcutAction): void {
  if (!state) return;
  switch (action) {
    case "toggle-play":
      update(togglePlay(state));
      break;
    case "step-back":
      update(pause(stepFrames(state, -1)));
      break;
    case "step-forward":
      update(pause(stepFrames(state, 1)));
      break;
    case "mark-start":
      update(markStart(state));
      break;
    case "mark-end":
      handleMarkEnd();
      break;
  }
}

async function init(): Promise<void> {
  for (const gesture of GESTURES) {
    const option = document.createElement("option");
    option.value = gesture;
    option.textContent = gesture.replace("_", " ");
    gestureSelect.appendChild(option);
  }
  gestureSelect.addEventListener("change", () => {
    if (state) update(selectGesture(state, gestureSelect.value as Gesture));
  });

  videos = await api.listVideos();
  for (const video of videos) {
    const option = document.createElement("option");
    option.value = video.video_id;
    option.textContent = `${video.video_id} (${video.frame_count} frames @ ${video.fps}fps)`;
    videoSelect.appendChild(option);
  }
  videoSelect.addEventListener("change", () => {
    if (!confirmDiscard()) {
      videoSelect.value = state?.videoId ?? "";
      return;
    }
    const video = videos.find((v) => v.video_id === videoSelect.value);
    if (video) void openVideo(video);
  });

  frameSlider.addEventListener("input", () => {
    if (state) update(pause(seek(state, Number(frameSlider.value))));
  });
  playButton.addEventListener("click", () => state && update(togglePlay(state)));
  markStartButton.addEventListener("click", () => state && update(markStart(state)));
  markEndButton.addEventListener("click", handleMarkEnd);
  saveButton.addEventListener("click", () => void save());

  bindShortcuts(document, onShortcut);
  window.addEventListener("beforeunload", (event) => {
    if (state?.dirty) event.preventDefault();
  });

  if (videos.length) {
    videoSelect.value = videos[0].video_id;
    await openVideo(videos[0]);
  } else {
    toast("no videos found under the configured video root", true);
  }
}

void init();
