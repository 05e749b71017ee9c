export type Gesture = "tongue_out" | "smiling" | "mouth_opening";

export const GESTURES: Gesture[] = ["tongue_out", "smiling", "mouth_opening"];

export interface AnnotationEvent {
  gesture: Gesture;
  start_frame: number;
  end_frame: number;
  start_time_s: number;
  end_time_s: number;
}

export interface EventsDocument {
  video_id: string;
  fps: number;
  events: AnnotationEvent[];
}

export interface VideoInfo {
  video_id: string;
  frame_count: number;
  fps: number;
}

export interface SessionState {
  videoId: string;
  frameCount: number;
  fps: number;
  playbackFps: number;
  currentFrame: number;
  playing: boolean;
  pendingStart: number | null;
  selectedGesture: Gesture;
  events: AnnotationEvent[];
  dirty: boolean;
}
