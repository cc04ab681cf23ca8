// UI fidelity against a wire log recorded from the real service
// (frontend/scripts/capture_fixture.py): colors must equal the service
// accumulation vector exactly, the displayed qr must be the report field,
// and an IK failure must leave the ghost robot where it was.

import { describe, expect, it } from "vitest";
import type { PoseUpdateResponse, Report, SessionInfo } from "../src/api";
import { formatReport } from "../src/panel";
import { QualityBuffer } from "../src/quality";
import { GhostRobot } from "../src/robot";
import rawFixture from "./fixtures/drive_session.json";

interface Fixture {
  n_points: number;
  updates: PoseUpdateResponse[];
  final_quality: number[];
  report: Report;
  stream_batches: [number, number][][];
  robot_before: SessionInfo;
  robot_ik_failure: PoseUpdateResponse;
}

const fixture = rawFixture as unknown as Fixture;

describe("scripted drive session", () => {
  it("vertex colors equal the service accumulation vector exactly", () => {
    const buf = new QualityBuffer(fixture.n_points);
    for (const update of fixture.updates) {
      buf.applyDeltas(update.changed);
    }
    expect(Array.from(buf.values)).toEqual(fixture.final_quality);
  });

  it("reconnect replay over the websocket log matches too", () => {
    const buf = new QualityBuffer(fixture.n_points);
    for (const batch of fixture.stream_batches) {
      buf.applyBatch(batch);
    }
    expect(Array.from(buf.values)).toEqual(fixture.final_quality);
  });

  it("displayed qr is the report field verbatim", () => {
    const view = formatReport(fixture.report);
    expect(view.qr).toBe(fixture.report.quality_ratio.toFixed(4));
    expect(Number(view.qr)).toBeCloseTo(fixture.report.quality_ratio, 4);
  });

  it("IK failure leaves the ghost robot stationary", () => {
    const ghost = new GhostRobot();
    ghost.pose = fixture.robot_before.pose;
    ghost.joints = fixture.robot_before.joints;
    const moved = ghost.apply(fixture.robot_ik_failure);
    expect(moved).toBe(false);
    expect(ghost.pose).toEqual(fixture.robot_before.pose);
    expect(ghost.joints).toEqual(fixture.robot_before.joints);
    expect(ghost.warning).toBeTruthy();
    expect(fixture.robot_ik_failure.changed).toEqual([]);
  });
});
