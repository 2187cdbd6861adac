/**
 * Rendering tests: the markup must carry the served swatch hexes verbatim,
 * in served order, with no transformation.
 */

import assert from "node:assert/strict";
import test from "node:test";

import {
  escapeHtml,
  extractSwatchHexes,
  renderCompletion,
  renderTask,
} from "../src/render.js";
import type { TaskView } from "../src/types.js";

const SWATCHES = [
  { index: 1, hex: "#f6ede4" },
  { index: 2, hex: "#f3e7db" },
  { index: 3, hex: "#f7ead0" },
  { index: 4, hex: "#eadaba" },
  { index: 5, hex: "#d7bd96" },
  { index: 6, hex: "#a07e56" },
  { index: 7, hex: "#825c43" },
  { index: 8, hex: "#604134" },
  { index: 9, hex: "#3a312a" },
  { index: 10, hex: "#292420" },
];

function paletteTask(overrides: Partial<TaskView> = {}): TaskView {
  return {
    done: false,
    session_id: "s1",
    task_id: "t01",
    kind: "self",
    scale_id: "mst",
    background: { name: "gray", hex: "#777777" },
    prompt: "Select the number of the color that best matches your skin tone.",
    progress: { answered: 0, total: 6 },
    swatches: SWATCHES,
    ...overrides,
  };
}

test("palette swatch hexes render byte-identical and in served order", () => {
  const html = renderTask(paletteTask());
  assert.deepEqual(
    extractSwatchHexes(html),
    SWATCHES.map((s) => s.hex),
  );
  // each hex appears both as the painted color and as the data attribute
  for (const s of SWATCHES) {
    assert.ok(html.includes(`background-color:${s.hex}`));
    assert.ok(html.includes(`data-hex="${s.hex}"`));
  }
});

test("swatch markup snapshot is stable", () => {
  const html = renderTask(paletteTask({ swatches: SWATCHES.slice(0, 2) }));
  const expected =
    '<div class="swatch-row" role="radiogroup">' +
    '<button class="swatch" data-index="1" data-hex="#f6ede4"' +
    ' style="background-color:#f6ede4" aria-label="swatch 1">' +
    '<span class="swatch-label">1</span></button>' +
    '<button class="swatch" data-index="2" data-hex="#f3e7db"' +
    ' style="background-color:#f3e7db" aria-label="swatch 2">' +
    '<span class="swatch-label">2</span></button>' +
    "</div>";
  assert.ok(html.includes(expected), html);
});

test("task shell carries id, kind, prompt, and a disabled submit", () => {
  const html = renderTask(paletteTask());
  assert.ok(html.includes('data-task-id="t01"'));
  assert.ok(html.includes('data-kind="self"'));
  assert.ok(html.includes("Select the number of the color"));
  assert.ok(html.includes('<button class="submit" disabled>'));
  assert.ok(html.includes("Question 1 of 6"));
});

test("text questionnaire renders six single-select options", () => {
  const options = [
    "Type I: always burns, never tans",
    "Type II: usually burns, tans minimally",
    "Type III: sometimes burns mildly, tans uniformly",
    "Type IV: burns minimally, always tans well",
    "Type V: very rarely burns, tans very easily",
    "Type VI: never burns, deeply pigmented",
  ];
  const html = renderTask(
    paletteTask({ kind: "self", scale_id: "fst", swatches: undefined, options }),
  );
  const buttons = html.match(/class="option"/g) ?? [];
  assert.equal(buttons.length, 6);
  for (const text of options) {
    assert.ok(html.includes(escapeHtml(text)));
  }
  assert.ok(!html.includes("swatch-row"));
});

test("attentional task shows the target patch with the exact hex", () => {
  const html = renderTask(
    paletteTask({ kind: "attentional", target_hex: "#eadaba" }),
  );
  assert.ok(
    html.includes(
      'class="target-patch" data-hex="#eadaba" style="background-color:#eadaba"',
    ),
  );
});

test("image task embeds the stimulus reference", () => {
  const html = renderTask(
    paletteTask({ kind: "image", image: "/images/IMG-SUBJ01-B" }),
  );
  assert.ok(html.includes('src="/images/IMG-SUBJ01-B"'));
});

test("preference task renders one button per candidate scale", () => {
  const html = renderTask(
    paletteTask({ kind: "preference", swatches: undefined, choices: ["cst", "mst"] }),
  );
  assert.ok(html.includes('data-choice="cst"'));
  assert.ok(html.includes('data-choice="mst"'));
});

test("prompt text is escaped, swatch hex is not mangled", () => {
  const html = renderTask(
    paletteTask({ prompt: 'Pick <the> "best" & brightest' }),
  );
  assert.ok(html.includes("Pick &lt;the&gt; &quot;best&quot; &amp; brightest"));
  assert.ok(html.includes("#f6ede4"));
});

test("malformed hex from the service is rejected loudly", () => {
  assert.throws(
    () =>
      renderTask(
        paletteTask({ swatches: [{ index: 1, hex: "url(javascript:x)" }] }),
      ),
    /not a hex color/,
  );
});

test("completion screen reports the answered count", () => {
  const html = renderCompletion({ done: true, session_id: "s1", completed: 6 });
  assert.ok(html.includes("6 questions"));
});
