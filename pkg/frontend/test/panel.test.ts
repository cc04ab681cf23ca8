import { describe, expect, it } from "vitest";
import type { Report } from "../src/api";
import { evaluateEnabled, formatReport } from "../src/panel";

const report: Report = {
  schema_version: 1,
  user_f: 12.3456,
  user_cost: 987.6,
  gcb_f: 11.0,
  gcb_plus_f: 13.0,
  quality_ratio: 0.9497,
  opt_metric_user: 0.3549,
  opt_metric_auto: 0.3736,
  per_point_quality: [],
  auto_order: [1, 2],
  user_beats_auto: false,
};

describe("formatReport", () => {
  it("formats report fields verbatim, no client math", () => {
    const view = formatReport(report);
    expect(view.qr).toBe("0.9497");
    expect(view.userF).toBe("12.35");
    expect(view.userCost).toBe("987.6");
    expect(view.autoF).toBe("13.00");
    expect(view.optMetricUser).toBe("0.3549");
  });

  it("verdict follows the service flag, not the numbers", () => {
    expect(formatReport(report).verdict).toMatch(/automated plan covers/);
    const winning = { ...report, user_beats_auto: true, quality_ratio: 0.2 };
    expect(formatReport(winning).verdict).toMatch(/beats/);
  });
});

describe("evaluateEnabled", () => {
  it("requires a stored path and no active recording", () => {
    expect(evaluateEnabled(0, false)).toBe(false);
    expect(evaluateEnabled(1, true)).toBe(false);
    expect(evaluateEnabled(1, false)).toBe(true);
  });
});
