/**
 * HTTP client for the survey service.
 *
 * Submission is retry-safe: the service answers one response per task and
 * rejects duplicates with 409, so a retried request that actually landed
 * the first time resolves as accepted rather than surfacing an error and
 * double-submitting.
 */

import type {
  NextPayload,
  ResponseValue,
  SessionSummary,
  SubmitAck,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function detailOf(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: string };
    return body.detail ?? res.statusText;
  } catch {
    return res.statusText;
  }
}

export interface ClientOptions {
  retries?: number;
  backoffMs?: number;
}

export class SurveyClient {
  private readonly retries: number;
  private readonly backoffMs: number;

  constructor(
    readonly baseUrl: string,
    options: ClientOptions = {},
  ) {
    this.retries = options.retries ?? 3;
    this.backoffMs = options.backoffMs ?? 250;
  }

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  private async withRetries(run: () => Promise<Response>): Promise<Response> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= this.retries; attempt++) {
      try {
        return await run();
      } catch (err) {
        // network-level failure only; HTTP errors are handled by callers
        lastError = err;
        if (attempt < this.retries) {
          await new Promise((r) => setTimeout(r, this.backoffMs * 2 ** attempt));
        }
      }
    }
    throw lastError;
  }

  async createSession(raterId: string, study: number, seed?: number): Promise<SessionSummary> {
    const res = await this.withRetries(() =>
      fetch(this.url("/sessions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ rater_id: raterId, study, seed: seed ?? null }),
      }),
    );
    if (!res.ok) {
      throw new ApiError(await detailOf(res), res.status);
    }
    return (await res.json()) as SessionSummary;
  }

  async nextTask(sessionId: string): Promise<NextPayload> {
    const res = await this.withRetries(() =>
      fetch(this.url(`/sessions/${sessionId}/next`)),
    );
    if (!res.ok) {
      throw new ApiError(await detailOf(res), res.status);
    }
    return (await res.json()) as NextPayload;
  }

  /**
   * Submit one response. Resolves on acceptance; a 409 duplicate for this
   * task resolves too (an earlier attempt landed), so callers can retry a
   * timed-out submit without risking a double record.
   */
  async submitResponse(
    sessionId: string,
    taskId: string,
    response: ResponseValue,
  ): Promise<SubmitAck> {
    const res = await this.withRetries(() =>
      fetch(this.url(`/sessions/${sessionId}/responses`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ task_id: taskId, response }),
      }),
    );
    if (res.status === 409) {
      const detail = await detailOf(res);
      if (detail.includes("already answered")) {
        return { accepted: true, task_id: taskId, kind: "duplicate" };
      }
      throw new ApiError(detail, res.status);
    }
    if (!res.ok) {
      throw new ApiError(await detailOf(res), res.status);
    }
    return (await res.json()) as SubmitAck;
  }
}
