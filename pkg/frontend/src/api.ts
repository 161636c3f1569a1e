/** Thin typed client for the capture-service HTTP API. */

import { SketchRecord, SubmitResponse, TaskAssignment } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class CaptureApi {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async requestTask(drawerId: string): Promise<TaskAssignment> {
    const res = await this.fetchFn(
      `${this.baseUrl}/api/task?drawer_id=${encodeURIComponent(drawerId)}`,
    );
    const body = await res.json();
    if (!res.ok) {
      throw new ApiError(body.error ?? `task request failed (${res.status})`, res.status);
    }
    return body as TaskAssignment;
  }

  async submit(taskId: string, record: SketchRecord): Promise<SubmitResponse> {
    const res = await this.fetchFn(
      `${this.baseUrl}/api/submission/${encodeURIComponent(taskId)}`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(record),
      },
    );
    const body = await res.json();
    if (!res.ok) {
      throw new ApiError(body.error ?? `submission failed (${res.status})`, res.status);
    }
    return body as SubmitResponse;
  }

  imageUrl(assignment: TaskAssignment): string {
    return `${this.baseUrl}${assignment.image_url}`;
  }
}
