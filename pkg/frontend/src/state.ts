/**
 * Session view state, derived purely from service events. The console never
 * simulates the algorithm: every displayed number comes from an event field.
 */

import type { QueryPayload, SessionEvent, StepPayload } from "./validation.js";

export type Phase = "AwaitingStep" | "AwaitingHuman" | "Finished";

export interface HistoryPoint {
  t: number;
  regretCum: number;
  queriesCum: number;
  source: "AI" | "Human";
  adopted: boolean;
}

export interface SessionView {
  phase: Phase;
  stepIndex: number; // last completed step
  pendingQuery: QueryPayload | null;
  pendingT: number | null;
  lastStep: StepPayload | null;
  history: HistoryPoint[];
  totalQueries: number;
  finished: boolean;
  error: string | null;
}

export function initialView(): SessionView {
  return {
    phase: "AwaitingStep",
    stepIndex: 0,
    pendingQuery: null,
    pendingT: null,
    lastStep: null,
    history: [],
    totalQueries: 0,
    finished: false,
    error: null,
  };
}

export function reduce(view: SessionView, event: SessionEvent): SessionView {
  switch (event.type) {
    case "query":
      return {
        ...view,
        phase: "AwaitingHuman",
        pendingQuery: event.payload,
        pendingT: event.t,
      };
    case "step": {
      const queriesCum = view.totalQueries + (event.payload.queried ? 1 : 0);
      return {
        ...view,
        phase: "AwaitingStep",
        stepIndex: event.t,
        pendingQuery: null,
        pendingT: null,
        lastStep: event.payload,
        totalQueries: queriesCum,
        history: [
          ...view.history,
          {
            t: event.t,
            regretCum: event.payload.regret_cum,
            queriesCum,
            source: event.payload.source,
            adopted: event.payload.adopted,
          },
        ],
      };
    }
    case "finished":
      return { ...view, phase: "Finished", finished: true };
  }
}

export function reduceAll(events: SessionEvent[], start?: SessionView): SessionView {
  return events.reduce(reduce, start ?? initialView());
}

export function withError(view: SessionView, message: string): SessionView {
  // a malformed payload freezes the view behind an error banner
  return { ...view, error: message };
}
