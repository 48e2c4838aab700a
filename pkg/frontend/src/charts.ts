/**
 * Chart series builders: pure transforms from the event history to plottable
 * arrays (the rendering layer draws whatever these return, verbatim).
 */

import type { HistoryPoint } from "./state.js";

export interface Series {
  x: number[];
  y: number[];
}

export function regretSeries(history: HistoryPoint[]): Series {
  return { x: history.map((h) => h.t), y: history.map((h) => h.regretCum) };
}

export function querySeries(history: HistoryPoint[]): Series {
  return { x: history.map((h) => h.t), y: history.map((h) => h.queriesCum) };
}

/** Indices of steps where the expert's proposal was adopted (badge markers). */
export function adoptionMarkers(history: HistoryPoint[]): number[] {
  return history.filter((h) => h.source === "Human").map((h) => h.t);
}
