// Typed client for the session service. All numbers shown in the UI come
// from these responses; the client itself does no quality math.

export interface Pose {
  p: [number, number, number];
  q: [number, number, number, number];
}

export interface SceneInfo {
  name: string;
  n_points: number;
  n_poses: number;
  has_chain: boolean;
}

export interface SceneMesh {
  vertices: number[][];
  triangles: number[][];
  normals: number[][];
}

export interface QualityDelta {
  index: number;
  quality: number;
}

export interface PoseUpdateResponse {
  changed: QualityDelta[];
  visible_count: number;
  ik_ok: boolean;
  pose: Pose;
  joints: number[] | null;
  recording: boolean;
  recorded_samples: number;
}

export interface RecordingResponse {
  status: string;
  recording: boolean;
  samples: number;
  stored_paths: number;
  warning: string | null;
  pose: Pose | null;
}

export interface Report {
  schema_version: number;
  user_f: number;
  user_cost: number;
  gcb_f: number;
  gcb_plus_f: number;
  quality_ratio: number;
  opt_metric_user: number;
  opt_metric_auto: number;
  per_point_quality: number[];
  auto_order: number[];
  user_beats_auto: boolean;
}

export interface SessionInfo {
  session_id: string;
  scene: string;
  mode: string;
  pose: Pose;
  joints: number[] | null;
  recording: boolean;
  recorded_samples: number;
  stored_paths: number;
  accumulated_total: number;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string,
    private fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        detail = (await res.json()).detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return res.json() as Promise<T>;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listScenes(): Promise<SceneInfo[]> {
    return this.request("/scenes");
  }

  sceneMesh(name: string): Promise<SceneMesh> {
    return this.request(`/scenes/${name}/mesh`);
  }

  createSession(scene: string, mode: "free-camera" | "robot"): Promise<{ session_id: string; n_points: number }> {
    return this.post("/sessions", { scene, mode });
  }

  sessionState(id: string): Promise<SessionInfo> {
    return this.request(`/sessions/${id}`);
  }

  sessionQuality(id: string): Promise<{ values: number[] }> {
    return this.request(`/sessions/${id}/quality`);
  }

  updatePose(id: string, body: Record<string, unknown>): Promise<PoseUpdateResponse> {
    return this.post(`/sessions/${id}/pose`, body);
  }

  recording(id: string, action: "start" | "stop" | "scrub", fraction?: number): Promise<RecordingResponse> {
    return this.post(`/sessions/${id}/recording`, { action, fraction });
  }

  evaluate(id: string, pathIndex: number): Promise<Report> {
    return this.post(`/sessions/${id}/evaluate`, { path_index: pathIndex });
  }

  streamUrl(id: string): string {
    return this.base.replace(/^http/, "ws") + `/sessions/${id}/stream`;
  }
}
