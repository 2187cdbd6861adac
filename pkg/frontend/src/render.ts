/**
 * Pure HTML renderers for survey tasks.
 *
 * Everything here is a string-in, string-out function so the exact markup
 * is testable without a browser. Swatch hex values pass through verbatim:
 * no client-side color transformation, reordering, or resizing, since the
 * instrument's validity rests on showing exactly the served colors.
 */

import type { NextPayload, SessionComplete, TaskView } from "./types.js";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Swatch colors are #rrggbb strings; anything else is a protocol error. */
export function assertHex(hex: string): string {
  if (!/^#[0-9a-f]{6}$/i.test(hex)) {
    throw new Error(`not a hex color: ${hex}`);
  }
  return hex;
}

function swatchRow(swatches: { index: number; hex: string }[]): string {
  const cells = swatches
    .map(
      (s) =>
        `<button class="swatch" data-index="${s.index}" data-hex="${assertHex(s.hex)}"` +
        ` style="background-color:${assertHex(s.hex)}" aria-label="swatch ${s.index}">` +
        `<span class="swatch-label">${s.index}</span></button>`,
    )
    .join("");
  return `<div class="swatch-row" role="radiogroup">${cells}</div>`;
}

function optionList(options: string[]): string {
  const items = options
    .map(
      (text, i) =>
        `<button class="option" data-index="${i + 1}">` +
        `<span class="option-number">${i + 1}.</span> ${escapeHtml(text)}</button>`,
    )
    .join("");
  return `<div class="option-list" role="radiogroup">${items}</div>`;
}

function choiceButtons(choices: string[]): string {
  const items = choices
    .map(
      (id) =>
        `<button class="choice" data-choice="${escapeHtml(id)}">` +
        `${escapeHtml(id.toUpperCase())}</button>`,
    )
    .join("");
  return `<div class="choice-list" role="radiogroup">${items}</div>`;
}

export function renderTask(view: TaskView): string {
  const parts: string[] = [];
  parts.push(
    `<p class="progress">Question ${view.progress.answered + 1} of ${view.progress.total}</p>`,
  );
  parts.push(`<p class="prompt">${escapeHtml(view.prompt)}</p>`);
  if (view.kind === "attentional" && view.target_hex) {
    parts.push(
      `<div class="target-patch" data-hex="${assertHex(view.target_hex)}"` +
        ` style="background-color:${assertHex(view.target_hex)}"` +
        ` aria-label="color to match"></div>`,
    );
  }
  if (view.kind === "image" && view.image) {
    parts.push(
      `<img class="stimulus" src="${escapeHtml(view.image)}" alt="person to rate">`,
    );
  }
  if (view.swatches) {
    parts.push(swatchRow(view.swatches));
  } else if (view.options) {
    parts.push(optionList(view.options));
  } else if (view.choices) {
    parts.push(choiceButtons(view.choices));
  }
  parts.push(
    `<div class="actions">` +
      `<button class="submit" disabled>Submit</button>` +
      `<p class="error" hidden></p>` +
      `</div>`,
  );
  return `<section class="task" data-task-id="${escapeHtml(view.task_id)}" data-kind="${view.kind}">${parts.join("")}</section>`;
}

export function renderCompletion(done: SessionComplete): string {
  return (
    `<section class="completion">` +
    `<h1>All done</h1>` +
    `<p>You answered ${done.completed} questions. Thank you.</p>` +
    `</section>`
  );
}

export function renderPayload(payload: NextPayload): string {
  return payload.done ? renderCompletion(payload) : renderTask(payload);
}

/** The swatch hexes a rendered task displays, in display order. */
export function extractSwatchHexes(html: string): string[] {
  const out: string[] = [];
  const re = /class="swatch" data-index="\d+" data-hex="(#[0-9a-f]{6})"/g;
  for (const match of html.matchAll(re)) {
    out.push(match[1]!);
  }
  return out;
}
