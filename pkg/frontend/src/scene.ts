/**
 * three.js layer: a point-cloud view with per-vertex displacement
 * colors, ray lines for remote pointers, and an overlay for scanned
 * points streamed in during the session. Pure presentation; all
 * numbers come from ViewerSession.
 */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";
import type { Frame, RemotePointer } from "./viewer";

const POINTER_RAY_LENGTH = 40;

export class SceneView {
  private renderer: THREE.WebGLRenderer;
  private scene: THREE.Scene;
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;

  private cloud: THREE.Points | null = null;
  private cloudPositions: Float32Array = new Float32Array(0);
  private cloudColors: Uint8Array = new Uint8Array(0);

  private scanned: THREE.Points;
  private scannedBuffer: number[] = [];

  private pointerGroup: THREE.Group;

  constructor(container: HTMLElement) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    container.appendChild(this.renderer.domElement);

    this.scene = new THREE.Scene();
    this.scene.background = new THREE.Color(0x10141a);

    this.camera = new THREE.PerspectiveCamera(
      50, container.clientWidth / Math.max(1, container.clientHeight),
      0.01, 10000);
    this.camera.position.set(4, 3, 6);

    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.enableDamping = true;

    this.pointerGroup = new THREE.Group();
    this.scene.add(this.pointerGroup);

    const scannedGeom = new THREE.BufferGeometry();
    scannedGeom.setAttribute(
      "position", new THREE.Float32BufferAttribute([], 3));
    this.scanned = new THREE.Points(
      scannedGeom,
      new THREE.PointsMaterial({ color: 0x9aa4b0, size: 0.035 }));
    this.scene.add(this.scanned);

    window.addEventListener("resize", () => {
      this.camera.aspect =
        container.clientWidth / Math.max(1, container.clientHeight);
      this.camera.updateProjectionMatrix();
      this.renderer.setSize(container.clientWidth, container.clientHeight);
    });
  }

  /** (Re)builds the main cloud from flat float64 xyz. */
  setCloud(points: Float64Array): void {
    if (this.cloud) {
      this.scene.remove(this.cloud);
      this.cloud.geometry.dispose();
      (this.cloud.material as THREE.Material).dispose();
    }
    const n = points.length / 3;
    this.cloudPositions = new Float32Array(points);
    this.cloudColors = new Uint8Array(n * 3).fill(255);

    const geom = new THREE.BufferGeometry();
    geom.setAttribute(
      "position", new THREE.BufferAttribute(this.cloudPositions, 3));
    geom.setAttribute(
      "color", new THREE.BufferAttribute(this.cloudColors, 3, true));
    const material = new THREE.PointsMaterial({
      size: 0.05, vertexColors: true });
    this.cloud = new THREE.Points(geom, material);
    this.scene.add(this.cloud);

    geom.computeBoundingSphere();
    const sphere = geom.boundingSphere;
    if (sphere) {
      this.controls.target.copy(sphere.center);
      const d = Math.max(1, sphere.radius * 2.2);
      this.camera.position.set(
        sphere.center.x + d, sphere.center.y + d * 0.6, sphere.center.z + d);
      this.controls.update();
    }
  }

  /** Writes a deformed+colored frame into the cloud buffers. */
  applyFrame(frame: Frame): void {
    if (!this.cloud) return;
    const geom = this.cloud.geometry;
    this.cloudPositions.set(frame.positions);
    this.cloudColors.set(frame.colors);
    geom.getAttribute("position").needsUpdate = true;
    geom.getAttribute("color").needsUpdate = true;
    geom.computeBoundingSphere();
  }

  /** Replaces the visible pointer rays. */
  setPointers(pointers: RemotePointer[]): void {
    for (const child of [...this.pointerGroup.children]) {
      this.pointerGroup.remove(child);
      if (child instanceof THREE.Line) {
        child.geometry.dispose();
        (child.material as THREE.Material).dispose();
      }
    }
    for (const p of pointers) {
      const geom = new THREE.BufferGeometry().setFromPoints([
        new THREE.Vector3(...p.origin),
        new THREE.Vector3(
          p.origin[0] + p.direction[0] * POINTER_RAY_LENGTH,
          p.origin[1] + p.direction[1] * POINTER_RAY_LENGTH,
          p.origin[2] + p.direction[2] * POINTER_RAY_LENGTH),
      ]);
      const material = new THREE.LineBasicMaterial({
        color: new THREE.Color(
          p.color[0] / 255, p.color[1] / 255, p.color[2] / 255),
      });
      this.pointerGroup.add(new THREE.Line(geom, material));
    }
  }

  /** Appends scanned points to the overlay. */
  addScanPoints(flat: Float64Array): void {
    for (const v of flat) this.scannedBuffer.push(v);
    const geom = this.scanned.geometry;
    geom.setAttribute(
      "position",
      new THREE.Float32BufferAttribute(this.scannedBuffer, 3));
    geom.getAttribute("position").needsUpdate = true;
    geom.computeBoundingSphere();
  }

  render(): void {
    this.controls.update();
    this.renderer.render(this.scene, this.camera);
  }

  dispose(): void {
    this.renderer.dispose();
  }
}
