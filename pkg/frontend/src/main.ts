// Browser entry point: wires the viewport, the session controller and the
// control panel together against a running session service.

import { ApiClient } from "./api";
import { SessionController } from "./app";
import { evaluateEnabled, formatReport } from "./panel";
import { Viewer } from "./viewer";

const SERVICE = (window as { SERVICE_URL?: string }).SERVICE_URL ?? "http://localhost:8000";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("viewport");
  const banner = el<HTMLDivElement>("banner");
  const panel = el<HTMLDivElement>("panel");
  const evaluateBtn = el<HTMLButtonElement>("evaluate");
  const recordBtn = el<HTMLButtonElement>("record");
  const scrubInput = el<HTMLInputElement>("scrub");
  const sceneSelect = el<HTMLSelectElement>("scene");

  const viewer = new Viewer(canvas);
  const api = new ApiClient(SERVICE);

  const controller = new SessionController(api, {
    onColors: (touched) => {
      for (const i of touched) {
        viewer.setVertexQuality(i, controller.quality.values[i]);
      }
    },
    onReport: (report) => {
      const view = formatReport(report);
      panel.innerHTML =
        `qr <b>${view.qr}</b> · user f ${view.userF} · ` +
        `budget ${view.userCost} · auto f ${view.autoF} · ` +
        `opt ${view.optMetricUser}<br>${view.verdict}`;
    },
    onWarning: (message) => {
      banner.textContent = message;
      banner.classList.add("visible");
      setTimeout(() => banner.classList.remove("visible"), 2500);
    },
  });

  const scenes = await api.listScenes();
  for (const scene of scenes) {
    const option = document.createElement("option");
    option.value = scene.name;
    option.textContent = `${scene.name} (${scene.n_points} pts)`;
    sceneSelect.appendChild(option);
  }

  async function openScene(name: string): Promise<void> {
    viewer.loadMesh(await api.sceneMesh(name));
    await controller.connect(name, "free-camera");
    if (controller.ghost.pose) {
      viewer.setGhostPose(controller.ghost.pose.p, controller.ghost.pose.q);
    }
    const ws = new WebSocket(api.streamUrl(controller.sessionId));
    ws.onmessage = (event) => {
      const msg = JSON.parse(event.data);
      if (msg.deltas) controller.applyStreamBatch(msg.deltas);
    };
  }

  sceneSelect.onchange = () => void openScene(sceneSelect.value);
  if (scenes.length) await openScene(scenes[0].name);

  recordBtn.onclick = async () => {
    if (controller.recording) {
      await controller.stopRecording();
      recordBtn.textContent = "record";
    } else {
      await controller.startRecording();
      recordBtn.textContent = "stop";
    }
    evaluateBtn.disabled = !evaluateEnabled(
      controller.storedPaths,
      controller.recording,
    );
  };

  scrubInput.oninput = async () => {
    const pose = await controller.scrub(Number(scrubInput.value));
    if (pose) viewer.setGhostPose(pose.p, pose.q);
  };

  evaluateBtn.disabled = true;
  evaluateBtn.onclick = () => void controller.evaluate();

  // Click-to-grab camera drive: while grabbed, mouse moves orbit the pose
  // around the object and each move is sent as a pose update.
  let grabbed = false;
  let yaw = 0;
  let pitch = 0.5;
  canvas.onmousedown = () => (grabbed = true);
  window.onmouseup = () => (grabbed = false);
  canvas.onmousemove = async (event) => {
    if (!grabbed || !controller.sessionId) return;
    yaw += event.movementX * 0.005;
    pitch = Math.min(1.4, Math.max(-1.4, pitch + event.movementY * 0.005));
    const r = 450;
    const p: [number, number, number] = [
      r * Math.cos(pitch) * Math.sin(yaw),
      -r * Math.cos(pitch) * Math.cos(yaw),
      120 + r * Math.sin(pitch),
    ];
    // orientation: look back at the object center; the service treats the
    // quaternion as camera-frame wxyz
    const res = await controller.moveCamera({ p, q: lookAtOrigin(p) });
    viewer.setGhostPose(res.pose.p, res.pose.q);
  };

  function loop(): void {
    viewer.render();
    requestAnimationFrame(loop);
  }
  loop();
}

// Quaternion (wxyz) for a camera at p looking at the workpiece center with
// -Z forward and global +Z as the up hint.
function lookAtOrigin(p: [number, number, number]): [number, number, number, number] {
  const f = normalize([-p[0], -p[1], 120 - p[2]]);
  const z = [-f[0], -f[1], -f[2]];
  let x = cross([0, 0, 1], z);
  if (norm(x) < 1e-9) x = [1, 0, 0];
  x = normalize(x);
  const y = cross(z, x);
  // rotation matrix with columns x, y, z -> quaternion
  const m = [x, y, z];
  const trace = m[0][0] + m[1][1] + m[2][2];
  const w = Math.sqrt(Math.max(0, 1 + trace)) / 2;
  const qx = (m[1][2] - m[2][1]) / (4 * w || 1);
  const qy = (m[2][0] - m[0][2]) / (4 * w || 1);
  const qz = (m[0][1] - m[1][0]) / (4 * w || 1);
  return [w, qx, qy, qz];
}

function cross(a: number[], b: number[]): number[] {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function norm(a: number[]): number {
  return Math.hypot(a[0], a[1], a[2]);
}

function normalize(a: number[]): number[] {
  const n = norm(a) || 1;
  return [a[0] / n, a[1] / n, a[2] / n];
}

void boot();
