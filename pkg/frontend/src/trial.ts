/**
 * Trial state machine: instructions -> countdown -> drawing -> submitted.
 *
 * The source image is requested only at the countdown-to-drawing transition,
 * never earlier, so no image pixels are reachable before the timer starts.
 * The deadline is scheduled at reveal; when it fires, input is disabled and
 * whatever was captured auto-submits, even an empty sketch (the service is
 * the judge of quality). Network failures retry with exponential backoff
 * while the record is preserved.
 */

import { Layout, Point, Viewport, computeLayout } from "./geometry.js";
import { StrokeRecorder } from "./strokes.js";
import { Cancel, Clock, Schedule, startCountdown } from "./timer.js";
import {
  CLIENT_VERSION,
  SketchRecord,
  SubmitResponse,
  TaskAssignment,
  TrialPhase,
} from "./types.js";

export const COUNTDOWN_SECONDS = 3;

export interface TrialDeps {
  submit: (taskId: string, record: SketchRecord) => Promise<SubmitResponse>;
  /** Trigger the actual image fetch; resolves when displayable. */
  loadImage: (url: string) => Promise<unknown>;
  imageUrl: (assignment: TaskAssignment) => string;
  clock: Clock;
  schedule: Schedule;
  onPhase?: (phase: TrialPhase) => void;
  onCountdownTick?: (secondsLeft: number) => void;
  onOutcome?: (outcome: SubmitResponse) => void;
  /** Stash the record before submission attempts (crash recovery). */
  persist?: (record: SketchRecord) => void;
  maxSubmitAttempts?: number;
  backoffMs?: number;
}

export class TrialExpired extends Error {}

export class TrialController {
  phase: TrialPhase = "instructions";
  remainingMs: number;

  private recorder: StrokeRecorder;
  private revealAt = 0;
  private cancelDeadline: Cancel = () => {};
  private result: Promise<SubmitResponse> | null = null;
  private resolveResult!: (r: SubmitResponse) => void;
  private rejectResult!: (e: unknown) => void;

  constructor(
    readonly assignment: TaskAssignment,
    viewport: Viewport,
    private deps: TrialDeps,
  ) {
    this.remainingMs = assignment.time_limit_s * 1000;
    this.recorder = new StrokeRecorder(
      computeLayout(viewport),
      assignment.image_w,
      assignment.image_h,
    );
  }

  /**
   * Leave the instructions screen: run the 3 s countdown, then reveal the
   * image and start the clock. Resolves with the submission outcome.
   */
  start(): Promise<SubmitResponse> {
    if (this.phase !== "instructions") {
      throw new Error(`cannot start from phase '${this.phase}'`);
    }
    if (this.deps.clock() >= 0 && this.isExpired()) {
      throw new TrialExpired(
        `assignment ${this.assignment.task_id} has expired`);
    }
    this.result = new Promise<SubmitResponse>((resolve, reject) => {
      this.resolveResult = resolve;
      this.rejectResult = reject;
    });
    this.setPhase("countdown");
    startCountdown(
      COUNTDOWN_SECONDS,
      (left) => this.deps.onCountdownTick?.(left),
      () => this.reveal(),
      this.deps.schedule,
    );
    return this.result;
  }

  private isExpired(): boolean {
    // expires_at is a server wall-clock timestamp in seconds
    return Date.now() / 1000 >= this.assignment.expires_at;
  }

  private reveal(): void {
    this.setPhase("drawing");
    this.revealAt = this.deps.clock();
    // the one and only place the image is requested
    void this.deps.loadImage(this.deps.imageUrl(this.assignment));
    this.cancelDeadline = this.deps.schedule(
      () => void this.finish(),
      this.assignment.time_limit_s * 1000,
    );
  }

  /** ms since reveal, for recording and the on-screen clock. */
  elapsedMs(): number {
    if (this.phase !== "drawing") return 0;
    return this.deps.clock() - this.revealAt;
  }

  resize(viewport: Viewport): void {
    this.recorder.setLayout(computeLayout(viewport));
  }

  layoutOf(viewport: Viewport): Layout {
    return computeLayout(viewport);
  }

  pointerDown(p: Point): void {
    if (this.phase !== "drawing") return;
    this.recorder.pointerDown(p, this.elapsedMs());
  }

  pointerMove(p: Point): void {
    if (this.phase !== "drawing") return;
    this.recorder.pointerMove(p, this.elapsedMs());
  }

  pointerUp(p: Point): void {
    if (this.phase !== "drawing") return;
    this.recorder.pointerUp(p, this.elapsedMs());
  }

  strokesSoFar() {
    return this.recorder.snapshot();
  }

  buildRecord(): SketchRecord {
    return {
      sketch_id: `sk-${this.assignment.task_id}`,
      image_id: this.assignment.image_id,
      drawer_id: this.assignment.drawer_id,
      time_limit_s: this.assignment.time_limit_s,
      canvas_w: this.assignment.image_w,
      canvas_h: this.assignment.image_h,
      strokes: this.recorder.snapshot(),
      client_version: CLIENT_VERSION,
      set_label: this.assignment.set_label,
    };
  }

  private async finish(): Promise<void> {
    if (this.phase !== "drawing") return;
    this.cancelDeadline();
    this.setPhase("submitted"); // input is dead from this instant
    const record = this.buildRecord();
    this.deps.persist?.(record);
    const attempts = this.deps.maxSubmitAttempts ?? 5;
    const backoff = this.deps.backoffMs ?? 500;
    for (let attempt = 0; ; attempt++) {
      try {
        const outcome = await this.deps.submit(this.assignment.task_id, record);
        this.deps.onOutcome?.(outcome);
        this.resolveResult(outcome);
        return;
      } catch (err) {
        if (attempt + 1 >= attempts) {
          this.rejectResult(err);
          return;
        }
        await new Promise<void>((resolve) =>
          this.deps.schedule(resolve, backoff * 2 ** attempt));
      }
    }
  }

  private setPhase(phase: TrialPhase): void {
    this.phase = phase;
    this.deps.onPhase?.(phase);
  }
}
