// Three.js viewport: inspection mesh with per-vertex quality colors, user
// path in red and automated path in blue, plus a camera/TCP ghost marker.

import * as THREE from "three";
import type { SceneMesh } from "./api";
import { colorArray, qualityColor } from "./quality";

export class Viewer {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private mesh: THREE.Mesh | null = null;
  private colors: THREE.BufferAttribute | null = null;
  private userLine: THREE.Line | null = null;
  private autoLine: THREE.Line | null = null;
  private ghost: THREE.AxesHelper;

  constructor(canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(
      50,
      canvas.clientWidth / Math.max(1, canvas.clientHeight),
      1,
      20000,
    );
    this.camera.position.set(0, -900, 600);
    this.camera.up.set(0, 0, 1);
    this.camera.lookAt(0, 0, 100);
    this.scene.background = new THREE.Color(0x15161a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.6));
    const key = new THREE.DirectionalLight(0xffffff, 0.8);
    key.position.set(400, -600, 800);
    this.scene.add(key);
    this.ghost = new THREE.AxesHelper(120);
    this.scene.add(this.ghost);
  }

  loadMesh(data: SceneMesh): void {
    if (this.mesh) this.scene.remove(this.mesh);
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute(
      "position",
      new THREE.Float32BufferAttribute(data.vertices.flat(), 3),
    );
    geometry.setAttribute(
      "normal",
      new THREE.Float32BufferAttribute(data.normals.flat(), 3),
    );
    geometry.setIndex(data.triangles.flat());
    const zero = colorArray(new Float64Array(data.vertices.length));
    this.colors = new THREE.BufferAttribute(zero, 3);
    geometry.setAttribute("color", this.colors);
    const material = new THREE.MeshLambertMaterial({ vertexColors: true });
    this.mesh = new THREE.Mesh(geometry, material);
    this.scene.add(this.mesh);
  }

  setVertexQuality(index: number, quality: number): void {
    if (!this.colors) return;
    const [r, g, b] = qualityColor(quality);
    this.colors.setXYZ(index, r, g, b);
    this.colors.needsUpdate = true;
  }

  setGhostPose(p: [number, number, number], q: [number, number, number, number]): void {
    this.ghost.position.set(p[0], p[1], p[2]);
    this.ghost.quaternion.set(q[1], q[2], q[3], q[0]); // wxyz -> xyzw
  }

  private setLine(
    existing: THREE.Line | null,
    points: number[][],
    color: number,
  ): THREE.Line {
    if (existing) this.scene.remove(existing);
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute(
      "position",
      new THREE.Float32BufferAttribute(points.flat(), 3),
    );
    const line = new THREE.Line(
      geometry,
      new THREE.LineBasicMaterial({ color }),
    );
    this.scene.add(line);
    return line;
  }

  showUserPath(points: number[][]): void {
    this.userLine = this.setLine(this.userLine, points, 0xe03131);
  }

  showAutoPath(points: number[][]): void {
    this.autoLine = this.setLine(this.autoLine, points, 0x3b6fe0);
  }

  render(): void {
    this.renderer.render(this.scene, this.camera);
  }
}
