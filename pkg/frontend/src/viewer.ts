/**
 * Flat-shaded triangle viewer built on three.js.
 *
 * The scene mirrors the service's session mesh and stays usable headless:
 * geometry building and mesh swapping never touch the DOM, so tests can run
 * them under node. `attach` is the only place that creates the WebGL
 * renderer and the orbit controls.
 *
 * The world is the service's: meshes live in the unit cube with z up, and
 * the sketch viewpoint indicator uses the same orbit formula the service
 * renders sketches with.
 */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";
import type { ParsedMesh } from "./objparse.js";
import type { CameraInfo } from "./state.js";

const CUBE_CENTER = new THREE.Vector3(0.5, 0.5, 0.5);

/** Eye position for a session camera, matching the service's orbit math. */
export function sessionEye(camera: CameraInfo): THREE.Vector3 {
  const az = (camera.azimuth * Math.PI) / 180;
  const el = (camera.elevation * Math.PI) / 180;
  return new THREE.Vector3(
    Math.sin(az) * Math.cos(el),
    -Math.cos(az) * Math.cos(el),
    Math.sin(el),
  )
    .multiplyScalar(camera.distance)
    .add(CUBE_CENTER);
}

/** Non-indexed position buffer so flat shading shows true facets. */
export function buildMeshGeometry(mesh: ParsedMesh): THREE.BufferGeometry {
  const positions = new Float32Array(mesh.faces.length * 9);
  let at = 0;
  for (const face of mesh.faces) {
    for (const index of face) {
      const [x, y, z] = mesh.vertices[index];
      positions[at++] = x;
      positions[at++] = y;
      positions[at++] = z;
    }
  }
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  geometry.computeVertexNormals();
  return geometry;
}

export class MeshViewer {
  readonly scene: THREE.Scene;
  private meshObject: THREE.Mesh | null = null;
  private material: THREE.MeshStandardMaterial;
  private renderer: THREE.WebGLRenderer | null = null;
  private camera: THREE.PerspectiveCamera | null = null;
  private controls: OrbitControls | null = null;

  constructor() {
    this.scene = new THREE.Scene();
    this.material = new THREE.MeshStandardMaterial({
      color: 0x8899bb,
      flatShading: true,
      side: THREE.DoubleSide,
    });
    const ambient = new THREE.AmbientLight(0xffffff, 0.45);
    const key = new THREE.DirectionalLight(0xffffff, 1.0);
    key.position.set(2, -3, 4);
    const fill = new THREE.DirectionalLight(0xffffff, 0.4);
    fill.position.set(-2, 2, 1);
    this.scene.add(ambient, key, fill);
  }

  get triangleCount(): number {
    if (this.meshObject === null) return 0;
    const position = this.meshObject.geometry.getAttribute("position");
    return position === undefined ? 0 : position.count / 3;
  }

  /** Replace the displayed mesh; an empty mesh leaves an empty scene. */
  setMesh(mesh: ParsedMesh): void {
    if (this.meshObject !== null) {
      this.scene.remove(this.meshObject);
      this.meshObject.geometry.dispose();
      this.meshObject = null;
    }
    if (mesh.faces.length === 0) return;
    this.meshObject = new THREE.Mesh(buildMeshGeometry(mesh), this.material);
    this.scene.add(this.meshObject);
  }

  /** Arrow from the sketch viewpoint toward the mesh: where strokes aim. */
  addViewpointIndicator(camera: CameraInfo): void {
    const eye = sessionEye(camera);
    const direction = CUBE_CENTER.clone().sub(eye).normalize();
    const arrow = new THREE.ArrowHelper(direction, eye, camera.distance * 0.35, 0xcc2222);
    this.scene.add(arrow);
  }

  /** Create the WebGL renderer and orbit controls on a canvas (browser only). */
  attach(canvas: HTMLCanvasElement, camera: CameraInfo): void {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setSize(canvas.clientWidth || 512, canvas.clientHeight || 512, false);
    this.camera = new THREE.PerspectiveCamera(camera.fov_deg, 1, 0.01, 100);
    this.camera.up.set(0, 0, 1);
    this.camera.position.copy(sessionEye(camera));
    this.camera.lookAt(CUBE_CENTER);
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.target.copy(CUBE_CENTER);
    this.controls.update();
    this.addViewpointIndicator(camera);
    const renderLoop = () => {
      if (this.renderer === null || this.camera === null) return;
      this.controls?.update();
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(renderLoop);
    };
    requestAnimationFrame(renderLoop);
  }
}
