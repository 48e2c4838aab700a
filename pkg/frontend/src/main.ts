/**
 * Console wiring: connect to a session, render the pending query form with the
 * AI candidate prefilled (immutable features read-only), gate submission on
 * the live distance meter, and draw the regret/query charts.
 */

import { adoptionMarkers, querySeries, regretSeries, type Series } from "./charts.js";
import { SessionClient } from "./client.js";
import { initialView, reduce, withError, type SessionView } from "./state.js";
import { canSubmit, distanceMeter, splitContext, type QueryPayload } from "./validation.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let view: SessionView = initialView();
let client: SessionClient;
let sessionId = "";

function drawSeries(canvas: HTMLCanvasElement, series: Series, markers: number[] = []) {
  const ctx = canvas.getContext("2d");
  if (!ctx || series.x.length === 0) return;
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const xMax = Math.max(...series.x, 1);
  const yMax = Math.max(...series.y, 1e-9);
  const px = (x: number) => 30 + (x / xMax) * (w - 40);
  const py = (y: number) => h - 20 - (y / yMax) * (h - 30);
  ctx.strokeStyle = "#2563eb";
  ctx.beginPath();
  series.x.forEach((x, i) => (i === 0 ? ctx.moveTo(px(x), py(series.y[i])) : ctx.lineTo(px(x), py(series.y[i]))));
  ctx.stroke();
  ctx.fillStyle = "#dc2626";
  for (const t of markers) {
    const i = series.x.indexOf(t);
    if (i >= 0) {
      ctx.beginPath();
      ctx.arc(px(t), py(series.y[i]), 3, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
  ctx.fillStyle = "#374151";
  ctx.fillText(`max ${yMax.toFixed(2)}`, 4, 12);
}

function render() {
  $("phase").textContent = view.phase;
  $("step").textContent = `${view.stepIndex}`;
  $("queries").textContent = `${view.totalQueries}`;
  const banner = $("error-banner");
  banner.hidden = view.error === null;
  banner.textContent = view.error ?? "";

  const last = view.lastStep;
  $("last-decision").textContent = last
    ? `t=${view.stepIndex} action=${last.action} source=${last.source}` +
      ` ucb=${last.ucb.toFixed(3)} lcb=${last.lcb.toFixed(3)} ci=${last.ci.toFixed(3)}` +
      (last.adopted ? "  [expert adopted]" : "")
    : "—";

  drawSeries($("regret-chart") as HTMLCanvasElement, regretSeries(view.history), adoptionMarkers(view.history));
  drawSeries($("query-chart") as HTMLCanvasElement, querySeries(view.history));

  const form = $("query-form");
  form.hidden = view.pendingQuery === null || view.error !== null;
  if (view.pendingQuery) renderQueryForm(view.pendingQuery);
  ($("advance-btn") as HTMLButtonElement).disabled = view.phase !== "AwaitingStep";
}

function renderQueryForm(query: QueryPayload) {
  const { immutable, mutable } = splitContext(query.context, query.d_immutable);
  const aiMutable = splitContext(query.recourse, query.d_immutable).mutable;
  $("candidate-bounds").textContent =
    `AI candidate: action ${query.action}, ucb ${query.ucb.toFixed(3)}, ` +
    `lcb ${query.lcb.toFixed(3)}, ci ${query.ci.toFixed(3)}`;

  const fields = $("fields");
  if (fields.childElementCount === 0) {
    query.feature_labels.forEach((label, i) => {
      const row = document.createElement("label");
      row.className = "field-row";
      const input = document.createElement("input");
      input.type = "number";
      input.step = "any";
      input.id = `feat-${i}`;
      if (i < query.d_immutable) {
        input.value = String(immutable[i]);
        input.readOnly = true;
      } else {
        input.value = String(aiMutable[i - query.d_immutable]); // prefill with the AI candidate
        input.addEventListener("input", updateMeter);
      }
      row.append(`${label} `, input);
      fields.append(row);
    });
    const actionInput = $("action-input") as HTMLInputElement;
    actionInput.max = String(query.n_actions - 1);
    actionInput.value = String(query.action);
    actionInput.addEventListener("input", updateMeter);
  }
  updateMeter();

  function editedMutable(): number[] {
    return mutable.map((_, j) => Number((document.getElementById(`feat-${query.d_immutable + j}`) as HTMLInputElement).value));
  }

  function updateMeter() {
    const edited = editedMutable();
    const meter = distanceMeter(edited, mutable, query.constraint);
    $("distance-meter").textContent = `distance ${meter.distance.toFixed(3)} / budget ${meter.limit.toFixed(3)}`;
    $("distance-meter").className = meter.feasible ? "ok" : "violation";
    const action = Number(($("action-input") as HTMLInputElement).value);
    ($("submit-btn") as HTMLButtonElement).disabled = !canSubmit(action, edited, query);
  }

  ($("submit-btn") as HTMLButtonElement).onclick = async () => {
    const action = Number(($("action-input") as HTMLInputElement).value);
    const edited = editedMutable();
    if (!canSubmit(action, edited, query)) return; // the gate also disables the button
    try {
      const result = await client.submitHuman(sessionId, action, edited);
      $("fields").replaceChildren();
      if (!result.ok && result.stale) {
        showToast("submission was stale; resynced from the server");
        await resync();
      }
    } catch (err) {
      view = withError(view, String(err));
      render();
    }
  };
}

function showToast(message: string) {
  const toast = $("toast");
  toast.textContent = message;
  toast.hidden = false;
  setTimeout(() => (toast.hidden = true), 4000);
}

async function resync() {
  const snap = await client.snapshot(sessionId);
  view = { ...view, phase: snap.phase as SessionView["phase"] };
  render();
}

async function start() {
  const base = ($("service-url") as HTMLInputElement).value;
  client = new SessionClient(base);
  const config = JSON.parse(($("config-input") as HTMLTextAreaElement).value);
  sessionId = await client.createSession(config);
  view = initialView();
  client.stream(
    sessionId,
    (event) => {
      view = reduce(view, event);
      render();
    },
    (err) => {
      view = withError(view, `stream error: ${String(err)}`);
      render();
    },
  );
  render();
}

$("start-btn").addEventListener("click", () => void start().catch((err) => {
  view = withError(view, String(err));
  render();
}));
$("advance-btn").addEventListener("click", () => void client.advance(sessionId).catch((err) => {
  view = withError(view, String(err));
  render();
}));
