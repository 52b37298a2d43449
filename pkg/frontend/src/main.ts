/** Single-page wiring for the dot editor and the click-line game. */

import { ApiClient } from "./api.js";
import { ClicklineGame } from "./clickline.js";
import { EditorState } from "./editor.js";
import {
  canvasToDomain,
  drawDotScene,
  drawGaborField,
  drawTruthSegment,
} from "./render.js";

const DOMAIN = { width: 512, height: 512 };

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function setupEditor(api: ApiClient): void {
  const canvas = byId<HTMLCanvasElement>("editor-canvas");
  const ctx = canvas.getContext("2d")!;
  const status = byId<HTMLElement>("editor-status");
  const state = new EditorState(DOMAIN, api);

  const redraw = () => {
    drawDotScene(ctx, state.domain, state.points, state.overlay,
                 state.overlayStale);
    const n = state.points.length;
    const rects = state.overlay.length;
    const stale = state.overlayStale ? " (overlay stale)" : "";
    status.textContent = state.lastError
      ? `error: ${state.lastError}`
      : `${n} dots, ${rects} detections${stale}`;
    byId<HTMLButtonElement>("editor-undo").disabled = !state.canUndo;
  };

  canvas.addEventListener("click", (ev) => {
    const [x, y] = canvasToDomain(canvas, state.domain, ev);
    if (ev.shiftKey) {
      state.removeDotNear(x, y);
    } else {
      state.addDot(x, y);
    }
    redraw();
  });
  byId("editor-random").addEventListener("click", () => {
    state.addRandomDots(20);
    redraw();
  });
  byId("editor-clear").addEventListener("click", () => {
    state.clear();
    redraw();
  });
  byId("editor-undo").addEventListener("click", () => {
    state.undo();
    redraw();
  });
  byId("editor-detect").addEventListener("click", async () => {
    const mode = byId<HTMLSelectElement>("editor-mode").value;
    const filter = byId<HTMLSelectElement>("editor-filter").value;
    state.config = {
      mode: mode as "basic" | "refined",
      filter: filter as "none" | "exclusion" | "masking",
    };
    await state.detect();
    redraw();
  });
  byId("editor-archive").addEventListener("click", async () => {
    const ok = await state.archive();
    if (ok) status.textContent = `archived as ${state.lastArchiveId}`;
    else redraw();
  });
  byId<HTMLInputElement>("editor-upload").addEventListener("change",
    async (ev) => {
      const file = (ev.target as HTMLInputElement).files?.[0];
      if (!file) return;
      try {
        const data = JSON.parse(await file.text());
        state.loadPoints(data.points ?? []);
      } catch {
        state.lastError = "could not parse the uploaded pattern";
      }
      redraw();
    });
  redraw();
}

function setupClickline(api: ApiClient): void {
  const canvas = byId<HTMLCanvasElement>("game-canvas");
  const ctx = canvas.getContext("2d")!;
  const status = byId<HTMLElement>("game-status");
  const game = new ClicklineGame(api);

  const show = () => {
    if (!game.stimulus) return;
    const { domain, elements } = game.stimulus.field;
    const barLength = 0.45 * (domain.width / Math.sqrt(elements.length));
    drawGaborField(ctx, domain, elements, barLength);
    if (game.lastResult) {
      drawTruthSegment(ctx, domain, game.lastResult.truth);
    }
    const training = game.isTraining ? " — training sequence" : "";
    if (game.phase === "summary") {
      const scores = game.sequenceScores.map((s) => s.toFixed(0)).join(", ");
      status.textContent =
        `sequence done: [${scores}] mean ${game.sequenceMean!.toFixed(1)}` +
        ` → tier ${game.lastResult!.next_tier}`;
    } else if (game.lastResult) {
      status.textContent =
        `score ${game.lastResult.score.toFixed(1)} ` +
        `(distance ${game.lastResult.distance.toFixed(1)})${training}`;
    } else {
      status.textContent =
        `tier ${game.stimulus.tier}, trial ${game.stimulus.trial + 1}/10` +
        `${training} — click the aligned line`;
    }
    if (game.lastError) status.textContent = `error: ${game.lastError}`;
  };

  byId("game-next").addEventListener("click", async () => {
    game.acknowledgeSummary();
    await game.next();
    show();
  });
  canvas.addEventListener("click", async (ev) => {
    if (game.phase !== "showing" || !game.stimulus) return;
    const [x, y] = canvasToDomain(canvas, game.stimulus.field.domain, ev);
    await game.answer(x, y);
    show();
  });
}

const api = new ApiClient("");
setupEditor(api);
setupClickline(api);
