import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api";
import { SessionController } from "../src/app";

// Minimal fake service speaking the real wire shapes; records every
// request so tests can assert the client sent no math of its own.
function fakeService() {
  const log: { path: string; body: unknown }[] = [];
  let recording = false;
  let samples = 0;
  let stored = 0;

  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = url.replace("http://svc", "");
    const body = init?.body ? JSON.parse(init.body as string) : null;
    log.push({ path, body });
    const json = (data: unknown, status = 200) =>
      new Response(JSON.stringify(data), { status });

    if (path === "/sessions" && init?.method === "POST") {
      return json({ session_id: "s1", scene: body.scene, mode: body.mode, n_points: 5 });
    }
    if (path === "/sessions/s1" && !init?.method) {
      return json({
        session_id: "s1", scene: "panel", mode: "free-camera",
        pose: { p: [0, 0, 500], q: [1, 0, 0, 0] }, joints: null,
        recording, recorded_samples: samples, stored_paths: stored,
        accumulated_total: 0,
      });
    }
    if (path === "/sessions/s1/pose") {
      if (samples >= 0 && recording) samples += 1;
      const unreachable = body.tcp_target && body.tcp_target.p[0] > 1e5;
      return json({
        changed: unreachable ? [] : [{ index: 0, quality: 0.5 }],
        visible_count: unreachable ? 0 : 1,
        ik_ok: !unreachable,
        pose: body.pose ?? { p: [0, 0, 500], q: [1, 0, 0, 0] },
        joints: null, recording, recorded_samples: samples,
      });
    }
    if (path === "/sessions/s1/recording") {
      if (body.action === "start") {
        recording = true;
        samples = 0;
      } else if (body.action === "stop") {
        recording = false;
        if (samples > 0) stored += 1;
      }
      return json({
        status: body.action, recording, samples, stored_paths: stored,
        warning: body.action === "stop" && samples === 0 ? "empty" : null,
        pose: body.action === "scrub" ? { p: [1, 2, 3], q: [1, 0, 0, 0] } : null,
      });
    }
    if (path === "/sessions/s1/evaluate") {
      return json({
        schema_version: 1, user_f: 2, user_cost: 10, gcb_f: 2, gcb_plus_f: 2,
        quality_ratio: 1.0, opt_metric_user: 0.3, opt_metric_auto: 0.3,
        per_point_quality: [0.5, 0, 0, 0, 0], auto_order: [0],
        user_beats_auto: false,
      });
    }
    return json({ detail: "not found" }, 404);
  };

  return { api: new ApiClient("http://svc", fetchFn), log };
}

describe("SessionController", () => {
  it("drives, records and evaluates through the protocol only", async () => {
    const { api, log } = fakeService();
    const reports: number[] = [];
    const controller = new SessionController(api, {
      onReport: (r) => reports.push(r.quality_ratio),
    });
    await controller.connect("panel", "free-camera");
    await controller.startRecording();
    await controller.moveCamera({ p: [0, -400, 200], q: [1, 0, 0, 0] });
    expect(controller.quality.values[0]).toBe(0.5);
    await controller.stopRecording();
    expect(controller.storedPaths).toBe(1);
    const report = await controller.evaluate();
    expect(report.quality_ratio).toBe(1.0);
    expect(reports).toEqual([1.0]);
    // evaluation was requested from the service, not computed locally
    expect(log.some((entry) => entry.path === "/sessions/s1/evaluate")).toBe(true);
  });

  it("keeps quality untouched when IK fails and raises a warning", async () => {
    const { api } = fakeService();
    const warnings: string[] = [];
    const controller = new SessionController(api, {
      onWarning: (w) => warnings.push(w),
    });
    await controller.connect("panel", "robot");
    const before = Array.from(controller.quality.values);
    const poseBefore = controller.ghost.pose;
    const res = await controller.dragTcp({ p: [1e6, 0, 0], q: [1, 0, 0, 0] });
    expect(res.ik_ok).toBe(false);
    expect(Array.from(controller.quality.values)).toEqual(before);
    expect(controller.ghost.pose).toEqual(poseBefore);
    expect(warnings.length).toBe(1);
  });

  it("scrub moves the ghost to the service-reported pose", async () => {
    const { api } = fakeService();
    const controller = new SessionController(api);
    await controller.connect("panel", "free-camera");
    const pose = await controller.scrub(0.5);
    expect(pose?.p).toEqual([1, 2, 3]);
    expect(controller.ghost.pose?.p).toEqual([1, 2, 3]);
  });

  it("surfaces service errors with their detail", async () => {
    const { api } = fakeService();
    const controller = new SessionController(api);
    await controller.connect("panel", "free-camera");
    controller.sessionId = "nope";
    await expect(controller.moveCamera({ p: [0, 0, 0], q: [1, 0, 0, 0] }))
      .rejects.toThrow("not found");
  });
});
