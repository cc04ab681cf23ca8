// Session controller: glue between the API client and the view state.
// Holds no quality math of its own; deltas and reports pass through.

import { ApiClient, Pose, PoseUpdateResponse, Report } from "./api";
import { GhostRobot } from "./robot";
import { QualityBuffer } from "./quality";

export type Mode = "free-camera" | "robot";

export interface SessionEvents {
  onColors?: (touched: number[]) => void;
  onReport?: (report: Report) => void;
  onWarning?: (message: string) => void;
}

export class SessionController {
  sessionId = "";
  mode: Mode = "free-camera";
  quality!: QualityBuffer;
  ghost = new GhostRobot();
  recording = false;
  recordedSamples = 0;
  storedPaths = 0;
  lastReport: Report | null = null;

  constructor(
    private api: ApiClient,
    private events: SessionEvents = {},
  ) {}

  async connect(scene: string, mode: Mode): Promise<void> {
    const created = await this.api.createSession(scene, mode);
    this.sessionId = created.session_id;
    this.mode = mode;
    this.quality = new QualityBuffer(created.n_points);
    const state = await this.api.sessionState(this.sessionId);
    this.ghost.pose = state.pose;
    this.ghost.joints = state.joints;
  }

  // Rebuild colors from a streamed delta batch, in arrival order.
  applyStreamBatch(batch: [number, number][]): void {
    const touched = this.quality.applyBatch(batch);
    this.events.onColors?.(touched);
  }

  private absorb(res: PoseUpdateResponse): PoseUpdateResponse {
    this.recording = res.recording;
    this.recordedSamples = res.recorded_samples;
    if (this.ghost.apply(res)) {
      const touched = this.quality.applyDeltas(res.changed);
      if (touched.length) this.events.onColors?.(touched);
    } else {
      this.events.onWarning?.(this.ghost.warning ?? "pose rejected");
    }
    return res;
  }

  async moveCamera(pose: Pose): Promise<PoseUpdateResponse> {
    return this.absorb(await this.api.updatePose(this.sessionId, { pose }));
  }

  async dragTcp(target: Pose): Promise<PoseUpdateResponse> {
    return this.absorb(
      await this.api.updatePose(this.sessionId, { tcp_target: target }),
    );
  }

  async slideExtraAxis(value: number): Promise<PoseUpdateResponse> {
    return this.absorb(
      await this.api.updatePose(this.sessionId, { extra_axis: value }),
    );
  }

  async startRecording(): Promise<void> {
    const res = await this.api.recording(this.sessionId, "start");
    this.recording = res.recording;
    this.recordedSamples = res.samples;
  }

  async stopRecording(): Promise<void> {
    const res = await this.api.recording(this.sessionId, "stop");
    this.recording = res.recording;
    this.storedPaths = res.stored_paths;
    if (res.warning) this.events.onWarning?.(res.warning);
  }

  async scrub(fraction: number): Promise<Pose | null> {
    const res = await this.api.recording(this.sessionId, "scrub", fraction);
    if (res.pose) this.ghost.pose = res.pose;
    return res.pose;
  }

  async evaluate(pathIndex = this.storedPaths - 1): Promise<Report> {
    const report = await this.api.evaluate(this.sessionId, pathIndex);
    this.lastReport = report;
    this.events.onReport?.(report);
    return report;
  }
}
