// Evaluation panel view model. Displayed strings are formatted straight
// from report fields; nothing is recomputed client side.

import type { Report } from "./api";

export interface PanelView {
  qr: string;
  userF: string;
  userCost: string;
  autoF: string;
  optMetricUser: string;
  verdict: string;
}

export function formatReport(report: Report): PanelView {
  return {
    qr: report.quality_ratio.toFixed(4),
    userF: report.user_f.toFixed(2),
    userCost: report.user_cost.toFixed(1),
    autoF: report.gcb_plus_f.toFixed(2),
    optMetricUser: report.opt_metric_user.toFixed(4),
    verdict: report.user_beats_auto
      ? "your path beats the automated plan"
      : "the automated plan covers more",
  };
}

export function evaluateEnabled(storedPaths: number, recording: boolean): boolean {
  return storedPaths > 0 && !recording;
}
