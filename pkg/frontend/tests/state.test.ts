import { describe, expect, it } from "vitest";

import { initialView, reduce, reduceAll, withError } from "../src/state.js";
import type { SessionEvent } from "../src/validation.js";

function queryEvent(t: number): SessionEvent {
  return {
    type: "query",
    t,
    payload: {
      context: [0.0, 0.0],
      action: 0,
      recourse: [0.5, 0.0],
      ucb: 1.5,
      lcb: 0.1,
      ci: 0.7,
      constraint: { kind: "two-norm", gamma: 1.0 },
      n_actions: 2,
      d_immutable: 0,
      feature_labels: ["a", "b"],
      timeout_s: 60,
    },
  };
}

function stepEvent(
  t: number,
  opts: { queried?: boolean; source?: "AI" | "Human"; adopted?: boolean; regret?: number } = {},
): SessionEvent {
  return {
    type: "step",
    t,
    payload: {
      action: 1,
      recourse: [0.5, 0.0],
      ucb: 1.5,
      lcb: 0.1,
      ci: 0.7,
      source: opts.source ?? "AI",
      regret_step: 0.1,
      regret_cum: opts.regret ?? 0.1 * t,
      queried: opts.queried ?? false,
      adopted: opts.adopted ?? false,
      reward: 1.0,
      context: [0.0, 0.0],
    },
  };
}

describe("reduce", () => {
  it("parks in AwaitingHuman on a query event", () => {
    const view = reduce(initialView(), queryEvent(1));
    expect(view.phase).toBe("AwaitingHuman");
    expect(view.pendingT).toBe(1);
    expect(view.pendingQuery?.ci).toBe(0.7);
  });

  it("clears the pending query when the step completes", () => {
    const view = reduceAll([queryEvent(1), stepEvent(1, { queried: true, source: "Human" })]);
    expect(view.phase).toBe("AwaitingStep");
    expect(view.pendingQuery).toBeNull();
    expect(view.stepIndex).toBe(1);
    expect(view.totalQueries).toBe(1);
  });

  it("accumulates history with cumulative query counts", () => {
    const view = reduceAll([
      queryEvent(1),
      stepEvent(1, { queried: true }),
      stepEvent(2),
      queryEvent(3),
      stepEvent(3, { queried: true, source: "Human", adopted: true }),
    ]);
    expect(view.history.map((h) => h.queriesCum)).toEqual([1, 1, 2]);
    expect(view.history[2].adopted).toBe(true);
    expect(view.totalQueries).toBe(2);
  });

  it("finishes on the finished event", () => {
    const view = reduceAll([
      stepEvent(1),
      { type: "finished", t: 1, payload: { regret_cum: 0.1, total_queries: 0 } },
    ]);
    expect(view.phase).toBe("Finished");
    expect(view.finished).toBe(true);
  });
});

describe("withError", () => {
  it("freezes the view behind an error message", () => {
    const view = withError(reduce(initialView(), stepEvent(1)), "bad payload");
    expect(view.error).toBe("bad payload");
    expect(view.stepIndex).toBe(1); // history is kept, not wiped
  });
});
