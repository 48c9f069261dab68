/**
 * Client-side session state: the sketchpad layers, the mesh mirror for the
 * viewer, and the submit/undo lifecycle against the editing service.
 *
 * The state machine enforces the two UI invariants directly:
 *  - at most one edit request is ever in flight;
 *  - a failed request leaves every local layer and the mesh untouched,
 *    with the failure surfaced as a toast message.
 */

import { BACKGROUND, EDIT, KEPT, decodeSketchPng, encodeSketchPng } from "./png.js";
import type { SketchBitmap } from "./png.js";
import { ParsedMesh, parseObj } from "./objparse.js";
import { Point, StrokeLayer } from "./strokes.js";

export type EditKind = "add" | "delete";

export interface CameraInfo {
  azimuth: number;
  elevation: number;
  distance: number;
  fov_deg: number;
  size: number;
}

export interface SessionDocument {
  id: string;
  bins: number;
  faces: number;
  camera: CameraInfo;
  history: number;
  added_faces?: number;
  removed_faces?: number;
}

export interface CreateSessionBody {
  obj?: string;
  bins?: number;
  azimuth?: number;
  elevation?: number;
  image_size?: number;
}

/** Everything the controller needs from the HTTP layer. */
export interface Transport {
  createSession(body: CreateSessionBody): Promise<SessionDocument>;
  getSession(id: string): Promise<SessionDocument>;
  getMeshObj(id: string): Promise<string>;
  getSketchPng(id: string): Promise<Uint8Array>;
  submitEdit(id: string, kind: EditKind, sketchPng: Uint8Array): Promise<SessionDocument>;
  undo(id: string): Promise<SessionDocument>;
}

export type SessionListener = (session: UiSession) => void;

export class UiSession {
  readonly transport: Transport;
  doc: SessionDocument;
  mesh: ParsedMesh;
  /** Server-synthesised sketch classes (background + kept strokes). */
  keptClasses: Uint8Array;
  readonly width: number;
  readonly height: number;
  /** Strokes the user has drawn for the next addition. */
  readonly pending: StrokeLayer;
  /** Kept-ink pixels the user has marked for erasure. */
  readonly erased: StrokeLayer;
  inFlight = false;
  toast: string | null = null;
  private listeners: SessionListener[] = [];

  private constructor(
    transport: Transport,
    doc: SessionDocument,
    mesh: ParsedMesh,
    sketch: SketchBitmap,
  ) {
    this.transport = transport;
    this.doc = doc;
    this.mesh = mesh;
    this.width = sketch.width;
    this.height = sketch.height;
    this.keptClasses = sketch.classes;
    this.pending = new StrokeLayer(sketch.width, sketch.height);
    this.erased = new StrokeLayer(sketch.width, sketch.height);
  }

  static async create(transport: Transport, body: CreateSessionBody = {}): Promise<UiSession> {
    const doc = await transport.createSession(body);
    const [obj, png] = await Promise.all([
      transport.getMeshObj(doc.id),
      transport.getSketchPng(doc.id),
    ]);
    return new UiSession(transport, doc, parseObj(obj), decodeSketchPng(png));
  }

  /** Re-attach to an existing server session (e.g. after a page reload). */
  static async resume(transport: Transport, id: string): Promise<UiSession> {
    const doc = await transport.getSession(id);
    const [obj, png] = await Promise.all([
      transport.getMeshObj(doc.id),
      transport.getSketchPng(doc.id),
    ]);
    return new UiSession(transport, doc, parseObj(obj), decodeSketchPng(png));
  }

  onChange(listener: SessionListener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this);
    }
  }

  /** Mask of pixels the server currently shows as kept strokes. */
  keptInkMask(): Uint8Array {
    const mask = new Uint8Array(this.keptClasses.length);
    for (let i = 0; i < mask.length; i++) {
      mask[i] = this.keptClasses[i] === KEPT ? 1 : 0;
    }
    return mask;
  }

  drawStroke(path: Point[], radius = 1): number {
    return this.pending.paint(path, radius);
  }

  /** Erase along a path; only existing kept ink is marked. */
  eraseStroke(path: Point[], radius = 2): number {
    return this.erased.paint(path, radius, this.keptInkMask());
  }

  undoStroke(kind: EditKind): boolean {
    return kind === "add" ? this.pending.undo() : this.erased.undo();
  }

  canSubmit(kind: EditKind): boolean {
    if (this.inFlight) return false;
    const layer = kind === "add" ? this.pending : this.erased;
    return layer.pixelCount > 0;
  }

  /**
   * The sketch the service is asked to act on: kept strokes stay black and
   * the relevant local layer is painted red, per the service palette.
   */
  composeSubmission(kind: EditKind): SketchBitmap {
    const classes = this.keptClasses.slice();
    const layer = kind === "add" ? this.pending : this.erased;
    for (let i = 0; i < classes.length; i++) {
      if (layer.mask[i]) classes[i] = EDIT;
    }
    return { width: this.width, height: this.height, classes };
  }

  /**
   * Submit the pending addition strokes or the erased set.
   *
   * Resolves true when the server accepted the edit; the local sketch is
   * then replaced by the server's refreshed sketch, both layers reset, and
   * the mesh mirror updated — listeners fire before the promise resolves.
   * Resolves false on rejection, leaving all local state exactly as it was
   * and `toast` describing the failure.
   */
  async submit(kind: EditKind): Promise<boolean> {
    if (this.inFlight) {
      throw new Error("an edit request is already in flight");
    }
    if (!this.canSubmit(kind)) {
      throw new Error(kind === "add" ? "nothing drawn to add" : "nothing marked to erase");
    }
    const png = encodeSketchPng(this.composeSubmission(kind));
    this.inFlight = true;
    try {
      const doc = await this.transport.submitEdit(this.doc.id, kind, png);
      await this.refresh(doc);
      return true;
    } catch (err) {
      this.toast = errorMessage(err);
      return false;
    } finally {
      this.inFlight = false;
    }
  }

  /** Ask the server to restore the previous snapshot. */
  async undoEdit(): Promise<boolean> {
    if (this.inFlight) {
      throw new Error("an edit request is already in flight");
    }
    this.inFlight = true;
    try {
      const doc = await this.transport.undo(this.doc.id);
      await this.refresh(doc);
      return true;
    } catch (err) {
      this.toast = errorMessage(err);
      return false;
    } finally {
      this.inFlight = false;
    }
  }

  /** Pull the committed mesh and sketch; clears local layers and the toast. */
  private async refresh(doc: SessionDocument): Promise<void> {
    const [obj, png] = await Promise.all([
      this.transport.getMeshObj(doc.id),
      this.transport.getSketchPng(doc.id),
    ]);
    const sketch = decodeSketchPng(png);
    if (sketch.width !== this.width || sketch.height !== this.height) {
      throw new Error(
        `server sketch is ${sketch.width}x${sketch.height}, session is ${this.width}x${this.height}`,
      );
    }
    this.doc = doc;
    this.mesh = parseObj(obj);
    this.keptClasses = sketch.classes;
    this.pending.clear();
    this.erased.clear();
    this.toast = null;
    this.emit();
  }

  /**
   * Current pad pixels for painting: server sketch with the local pending
   * layer in red on top and erased pixels highlighted red as well.
   */
  composeDisplay(): SketchBitmap {
    const classes = this.keptClasses.slice();
    for (let i = 0; i < classes.length; i++) {
      if (this.pending.mask[i] || this.erased.mask[i]) classes[i] = EDIT;
    }
    return { width: this.width, height: this.height, classes };
  }
}

export function errorMessage(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}

export { BACKGROUND, EDIT, KEPT };
