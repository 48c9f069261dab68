/**
 * Browser entry point: wires the sketchpad canvas, the tool buttons, and the
 * 3D viewer to one UiSession. Everything stateful lives in UiSession and
 * MeshViewer; this file is DOM glue only.
 */

import { HttpTransport } from "./api.js";
import { EDIT, KEPT, UiSession } from "./state.js";
import type { EditKind } from "./state.js";
import type { Point } from "./strokes.js";
import { MeshViewer } from "./viewer.js";

const PALETTE: Record<number, [number, number, number]> = {
  0: [0xff, 0xff, 0xff],
  [KEPT]: [0x00, 0x00, 0x00],
  [EDIT]: [0xff, 0x00, 0x00],
};

type Tool = "draw" | "erase";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) node.textContent = text;
  return node;
}

function canvasPoint(canvas: HTMLCanvasElement, event: PointerEvent): Point {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) * canvas.width) / rect.width,
    y: ((event.clientY - rect.top) * canvas.height) / rect.height,
  };
}

class App {
  private session: UiSession | null = null;
  private tool: Tool = "draw";
  private viewer = new MeshViewer();
  private viewerAttached = false;

  private readonly transport: HttpTransport;
  private readonly pad = el("canvas", { class: "pad" });
  private readonly viewCanvas = el("canvas", { class: "view", width: "512", height: "512" });
  private readonly toast = el("div", { class: "toast" });
  private readonly status = el("div", { class: "status" }, "no session");
  private readonly objInput = el("textarea", {
    rows: "6",
    placeholder: "Optional OBJ text for the initial mesh",
  });
  private readonly buttons = {
    create: el("button", {}, "New session"),
    draw: el("button", {}, "Draw"),
    erase: el("button", {}, "Erase"),
    undoStroke: el("button", {}, "Undo stroke"),
    submitAdd: el("button", {}, "Submit add"),
    submitDelete: el("button", {}, "Submit delete"),
    undoEdit: el("button", {}, "Undo edit"),
  };

  constructor(baseUrl: string) {
    this.transport = new HttpTransport(baseUrl);
  }

  mount(root: HTMLElement): void {
    const tools = el("div", { class: "tools" });
    for (const button of Object.values(this.buttons)) {
      tools.appendChild(button);
    }
    root.append(this.objInput, tools, this.status, this.toast, this.pad, this.viewCanvas);

    this.buttons.create.addEventListener("click", () => {
      void this.createSession();
    });
    this.buttons.draw.addEventListener("click", () => {
      this.tool = "draw";
      this.syncControls();
    });
    this.buttons.erase.addEventListener("click", () => {
      this.tool = "erase";
      this.syncControls();
    });
    this.buttons.undoStroke.addEventListener("click", () => {
      this.session?.undoStroke(this.tool === "draw" ? "add" : "delete");
      this.repaint();
    });
    this.buttons.submitAdd.addEventListener("click", () => {
      void this.submit("add");
    });
    this.buttons.submitDelete.addEventListener("click", () => {
      void this.submit("delete");
    });
    this.buttons.undoEdit.addEventListener("click", () => {
      void this.session?.undoEdit().then(() => this.repaint());
    });
    this.wirePointer();
    this.syncControls();
  }

  private async createSession(): Promise<void> {
    const obj = this.objInput.value.trim();
    try {
      this.session = await UiSession.create(this.transport, obj ? { obj } : {});
    } catch (err) {
      this.toast.textContent = err instanceof Error ? err.message : String(err);
      return;
    }
    const session = this.session;
    this.pad.width = session.width;
    this.pad.height = session.height;
    session.onChange(() => {
      this.viewer.setMesh(session.mesh);
      this.repaint();
    });
    this.viewer.setMesh(session.mesh);
    if (!this.viewerAttached) {
      this.viewer.attach(this.viewCanvas, session.doc.camera);
      this.viewerAttached = true;
    }
    this.repaint();
  }

  private async submit(kind: EditKind): Promise<void> {
    if (this.session === null || !this.session.canSubmit(kind)) return;
    this.syncControls();
    await this.session.submit(kind);
    this.repaint();
  }

  private wirePointer(): void {
    let path: Point[] = [];
    let down = false;
    this.pad.addEventListener("pointerdown", (event) => {
      if (this.session === null) return;
      down = true;
      this.pad.setPointerCapture(event.pointerId);
      path = [canvasPoint(this.pad, event)];
    });
    this.pad.addEventListener("pointermove", (event) => {
      if (!down || this.session === null) return;
      path.push(canvasPoint(this.pad, event));
      this.previewSegment(path[path.length - 2], path[path.length - 1]);
    });
    const finish = () => {
      if (!down || this.session === null) return;
      down = false;
      if (this.tool === "draw") {
        this.session.drawStroke(path);
      } else {
        this.session.eraseStroke(path);
      }
      path = [];
      this.repaint();
    };
    this.pad.addEventListener("pointerup", finish);
    this.pad.addEventListener("pointercancel", finish);
  }

  private previewSegment(from: Point, to: Point): void {
    const ctx = this.pad.getContext("2d");
    if (ctx === null) return;
    ctx.strokeStyle = "#ff0000";
    ctx.lineWidth = this.tool === "erase" ? 4 : 2;
    ctx.beginPath();
    ctx.moveTo(from.x, from.y);
    ctx.lineTo(to.x, to.y);
    ctx.stroke();
  }

  private repaint(): void {
    const session = this.session;
    if (session === null) return;
    const ctx = this.pad.getContext("2d");
    if (ctx === null) return;
    const display = session.composeDisplay();
    const image = ctx.createImageData(display.width, display.height);
    for (let i = 0; i < display.classes.length; i++) {
      const [r, g, b] = PALETTE[display.classes[i]] ?? [0xff, 0x00, 0xff];
      image.data[i * 4] = r;
      image.data[i * 4 + 1] = g;
      image.data[i * 4 + 2] = b;
      image.data[i * 4 + 3] = 0xff;
    }
    ctx.putImageData(image, 0, 0);
    this.toast.textContent = session.toast ?? "";
    this.status.textContent =
      `session ${session.doc.id.slice(0, 8)} · ${session.doc.faces} faces · ` +
      `history ${session.doc.history}`;
    this.syncControls();
  }

  private syncControls(): void {
    const session = this.session;
    this.buttons.draw.classList.toggle("active", this.tool === "draw");
    this.buttons.erase.classList.toggle("active", this.tool === "erase");
    this.buttons.submitAdd.disabled = session === null || !session.canSubmit("add");
    this.buttons.submitDelete.disabled = session === null || !session.canSubmit("delete");
    this.buttons.undoEdit.disabled = session === null || session.inFlight;
    this.buttons.undoStroke.disabled = session === null;
  }
}

const params = new URLSearchParams(window.location.search);
const app = new App(params.get("base") ?? window.location.origin);
app.mount(document.getElementById("app") ?? document.body);
