/**
 * Survey flow: one task per screen, advance only on server acknowledgment.
 *
 * The page background is painted with the session's served background color
 * so the palette sits on the assigned surround. A selection enables the
 * submit button; after acknowledgment the button stays disabled until the
 * next task renders, so a task can never submit twice. On failure the
 * selection is preserved and the reason shown.
 */

import { ApiError, SurveyClient } from "./api.js";
import { renderPayload } from "./render.js";
import type { ResponseValue, TaskView } from "./types.js";

interface Selection {
  value: ResponseValue;
  element: HTMLElement;
}

export class SurveyApp {
  private selection: Selection | null = null;

  constructor(
    private readonly client: SurveyClient,
    private readonly root: HTMLElement,
  ) {}

  async start(raterId: string, study: number): Promise<void> {
    const session = await this.client.createSession(raterId, study);
    document.body.dataset.sessionId = session.session_id;
    await this.showNext(session.session_id);
  }

  async resume(sessionId: string): Promise<void> {
    document.body.dataset.sessionId = sessionId;
    await this.showNext(sessionId);
  }

  private async showNext(sessionId: string): Promise<void> {
    const payload = await this.client.nextTask(sessionId);
    this.selection = null;
    this.root.innerHTML = renderPayload(payload);
    if (payload.done) {
      return;
    }
    document.body.style.backgroundColor = payload.background.hex;
    this.wire(sessionId, payload);
  }

  private wire(sessionId: string, view: TaskView): void {
    const submit = this.root.querySelector<HTMLButtonElement>("button.submit");
    if (!submit) {
      throw new Error("task markup missing its submit button");
    }
    const selectables = this.root.querySelectorAll<HTMLElement>(
      ".swatch, .option, .choice",
    );
    for (const el of selectables) {
      el.addEventListener("click", () => {
        for (const other of selectables) {
          other.classList.remove("selected");
        }
        el.classList.add("selected");
        this.selection = { value: selectionValue(el), element: el };
        submit.disabled = false;
      });
    }
    submit.addEventListener("click", () => {
      void this.submitCurrent(sessionId, view, submit);
    });
  }

  private async submitCurrent(
    sessionId: string,
    view: TaskView,
    submit: HTMLButtonElement,
  ): Promise<void> {
    if (!this.selection) {
      return;
    }
    submit.disabled = true; // no double submission while in flight
    const error = this.root.querySelector<HTMLElement>(".error");
    try {
      await this.client.submitResponse(sessionId, view.task_id, this.selection.value);
      await this.showNext(sessionId);
    } catch (err) {
      // keep the selection on screen, show why, allow another try
      submit.disabled = false;
      if (error) {
        error.hidden = false;
        error.textContent =
          err instanceof ApiError
            ? `The service rejected this response: ${err.message}`
            : "Could not reach the survey service. Your selection is kept; try again.";
      }
    }
  }
}

function selectionValue(el: HTMLElement): ResponseValue {
  if (el.dataset.choice !== undefined) {
    return el.dataset.choice;
  }
  const index = el.dataset.index;
  if (index === undefined) {
    throw new Error("selectable element carries no value");
  }
  return Number(index);
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "";
  const rater = params.get("rater") ?? `web-${Date.now().toString(36)}`;
  const study = Number(params.get("study") ?? "1");
  const resume = params.get("session");
  const root = document.getElementById("survey");
  if (!root) {
    throw new Error("missing #survey container");
  }
  const app = new SurveyApp(new SurveyClient(base), root);
  const run = resume ? app.resume(resume) : app.start(rater, study);
  run.catch((err) => {
    root.innerHTML = `<p class="error">Failed to start: ${String(err)}</p>`;
  });
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", boot);
  } else {
    boot();
  }
}
