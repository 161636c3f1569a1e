/** Browser wiring: DOM, pointer events, canvas painting, service calls. */

import { CaptureApi, ApiError } from "./api.js";
import { Viewport, computeLayout } from "./geometry.js";
import { renderProgress } from "./gradient.js";
import { realClock, realSchedule } from "./timer.js";
import { TrialController, TrialExpired } from "./trial.js";
import { SketchRecord, TaskAssignment } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function drawerId(): string {
  const key = "tracelab-drawer-id";
  let id = localStorage.getItem(key);
  if (!id) {
    id = `web-${Math.random().toString(36).slice(2, 10)}`;
    localStorage.setItem(key, id);
  }
  return id;
}

function viewportOf(canvas: HTMLCanvasElement, task: TaskAssignment): Viewport {
  return {
    cssWidth: canvas.clientWidth,
    cssHeight: canvas.clientHeight,
    imageW: task.image_w,
    imageH: task.image_h,
  };
}

async function run(): Promise<void> {
  const api = new CaptureApi("");
  const status = $("status");
  const canvas = $<HTMLCanvasElement>("trace-canvas");
  const ctx = canvas.getContext("2d")!;

  let task: TaskAssignment;
  try {
    task = await api.requestTask(drawerId());
  } catch (err) {
    status.textContent = err instanceof ApiError
      ? `No task available: ${err.message}`
      : "The capture service is unreachable.";
    return;
  }
  $("time-limit").textContent = `${task.time_limit_s}`;

  let image: HTMLImageElement | null = null;
  const controller = new TrialController(task, viewportOf(canvas, task), {
    submit: (taskId, record: SketchRecord) => api.submit(taskId, record),
    imageUrl: (a) => api.imageUrl(a),
    loadImage: (url) =>
      new Promise((resolve, reject) => {
        const img = new Image();
        img.onload = () => {
          image = img;
          resolve(img);
        };
        img.onerror = reject;
        img.src = url; // first and only image request of the trial
      }),
    clock: realClock,
    schedule: realSchedule,
    onPhase: (phase) => {
      document.body.dataset.phase = phase;
      if (phase === "drawing") status.textContent = "Trace the main object!";
      if (phase === "submitted") status.textContent = "Time! Submitting...";
    },
    onCountdownTick: (left) => {
      status.textContent = `Get ready... ${left}`;
    },
    onOutcome: (outcome) => {
      status.textContent = outcome.status === "accepted"
        ? "Submitted. Thank you!"
        : `Submission rejected: ${outcome.reason ?? "unknown reason"}`;
    },
    persist: (record) => {
      try {
        localStorage.setItem(`tracelab-pending-${task.task_id}`,
                             JSON.stringify(record));
      } catch {
        /* storage full or unavailable: the in-memory copy still retries */
      }
    },
  });

  const syncCanvasSize = () => {
    canvas.width = canvas.clientWidth * devicePixelRatio;
    canvas.height = canvas.clientHeight * devicePixelRatio;
    controller.resize(viewportOf(canvas, task));
  };
  syncCanvasSize();
  window.addEventListener("resize", syncCanvasSize);

  const pointerPos = (ev: PointerEvent) => {
    const rect = canvas.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  };
  canvas.addEventListener("pointerdown", (ev) => {
    canvas.setPointerCapture(ev.pointerId);
    controller.pointerDown(pointerPos(ev));
    ev.preventDefault();
  });
  canvas.addEventListener("pointermove", (ev) => {
    controller.pointerMove(pointerPos(ev));
    ev.preventDefault();
  });
  canvas.addEventListener("pointerup", (ev) => {
    controller.pointerUp(pointerPos(ev));
    ev.preventDefault();
  });

  const paint = () => {
    const layout = computeLayout(viewportOf(canvas, task));
    ctx.setTransform(devicePixelRatio, 0, 0, devicePixelRatio, 0, 0);
    ctx.clearRect(0, 0, canvas.clientWidth, canvas.clientHeight);
    if (controller.phase === "drawing" || controller.phase === "submitted") {
      if (image) {
        ctx.drawImage(image, layout.offsetX, layout.offsetY,
                      task.image_w * layout.scale, task.image_h * layout.scale);
      }
      renderProgress(ctx, controller.strokesSoFar(), layout);
      if (controller.phase === "drawing") {
        const left = Math.max(0, task.time_limit_s * 1000 - controller.elapsedMs());
        $("clock").textContent = (left / 1000).toFixed(1);
      }
    }
    requestAnimationFrame(paint);
  };
  requestAnimationFrame(paint);

  $("start-button").addEventListener("click", () => {
    try {
      controller.start().catch((err) => {
        status.textContent = `Submission failed: ${err}`;
      });
    } catch (err) {
      if (err instanceof TrialExpired) {
        status.textContent = "This task has expired; please reload for a new one.";
      } else {
        throw err;
      }
    }
    $("instructions").hidden = true;
  });
}

run();
