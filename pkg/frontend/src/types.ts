/** Wire types shared with the capture service. */

export interface TaskAssignment {
  task_id: string;
  drawer_id: string;
  image_id: string;
  time_limit_s: number;
  set_label: string;
  issued_at: number;
  expires_at: number;
  image_url: string;
  image_w: number;
  image_h: number;
}

/** One sample: x, y in source-image pixels, t in ms since image reveal. */
export type Sample = [number, number, number];

export interface SketchRecord {
  sketch_id: string;
  image_id: string;
  drawer_id: string;
  time_limit_s: number;
  canvas_w: number;
  canvas_h: number;
  strokes: Sample[][];
  client_version: string;
  set_label: string;
}

export interface SubmitResponse {
  status: "accepted" | "rejected";
  reason?: string;
}

export type TrialPhase = "instructions" | "countdown" | "drawing" | "submitted";

export const CLIENT_VERSION = "tracelab-ui/0.1";
