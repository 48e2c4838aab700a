import { describe, expect, it } from "vitest";

import { adoptionMarkers, querySeries, regretSeries } from "../src/charts.js";
import type { HistoryPoint } from "../src/state.js";

const history: HistoryPoint[] = [
  { t: 1, regretCum: 0.2, queriesCum: 1, source: "Human", adopted: true },
  { t: 2, regretCum: 0.5, queriesCum: 1, source: "AI", adopted: false },
  { t: 3, regretCum: 0.5, queriesCum: 2, source: "Human", adopted: true },
];

describe("chart series", () => {
  it("builds the cumulative regret series in step order", () => {
    expect(regretSeries(history)).toEqual({ x: [1, 2, 3], y: [0.2, 0.5, 0.5] });
  });

  it("builds the cumulative query series", () => {
    expect(querySeries(history)).toEqual({ x: [1, 2, 3], y: [1, 1, 2] });
  });

  it("marks the steps where the expert's proposal was used", () => {
    expect(adoptionMarkers(history)).toEqual([1, 3]);
  });

  it("handles an empty history", () => {
    expect(regretSeries([])).toEqual({ x: [], y: [] });
    expect(adoptionMarkers([])).toEqual([]);
  });
});
