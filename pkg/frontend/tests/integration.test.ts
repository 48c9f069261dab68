/**
 * Scripted end-to-end session against a live service process running the
 * oracle addition backend: create from an OBJ, draw strokes, submit an add,
 * erase the added part's strokes, submit a delete, undo — asserting after
 * every accepted edit that the local viewer mesh equals the server's OBJ
 * export.
 */

import { spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { HttpTransport } from "../src/api.js";
import { KEPT } from "../src/png.js";
import { parseObj, sameTriangles, triangleSet } from "../src/objparse.js";
import { UiSession } from "../src/state.js";
import { MeshViewer } from "../src/viewer.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
const PORT = 8473;
const BASE = `http://127.0.0.1:${PORT}`;
const SIZE = 160;

let server: ChildProcess;
let dataDir: string;
let transport: HttpTransport;

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "sketchmesh-ui-"));
  server = spawn(
    "python3",
    [
      "-m",
      "sketchmesh.cli",
      "serve",
      "--backend",
      "oracle",
      "--oracle-mesh",
      join(FIXTURES, "addition.obj"),
      "--host",
      "127.0.0.1",
      "--port",
      String(PORT),
      "--data-dir",
      dataDir,
      "--bins",
      "128",
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  server.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });
  const deadline = Date.now() + 30000;
  for (;;) {
    if (server.exitCode !== null) {
      throw new Error(`service exited early (${server.exitCode}): ${stderr}`);
    }
    try {
      const response = await fetch(`${BASE}/sessions/health-probe`);
      if (response.status === 404) break; // route handled: server is up
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service did not come up: ${stderr}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  transport = new HttpTransport(BASE);
});

afterAll(() => {
  server?.kill();
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

/** Background pixels arranged as short horizontal draw paths. */
function backgroundPaths(session: UiSession, count: number) {
  const paths = [];
  const { width, height } = session;
  for (let y = 2; y < height - 2 && paths.length < count; y += 7) {
    let run = 0;
    for (let x = 2; x < width - 2; x++) {
      const busy =
        session.keptClasses[y * width + x] !== 0 || session.pending.mask[y * width + x];
      run = busy ? 0 : run + 1;
      if (run >= 24) {
        paths.push([
          { x: x - 20, y },
          { x, y },
        ]);
        break;
      }
    }
  }
  return paths;
}

describe("scripted editing session", () => {
  it("add, delete, and undo keep the viewer mesh equal to the server export", async () => {
    const initialObj = readFileSync(join(FIXTURES, "initial.obj"), "utf8");
    const session = await UiSession.create(transport, {
      obj: initialObj,
      bins: 128,
      azimuth: 30,
      elevation: 30,
      image_size: SIZE,
    });
    const viewer = new MeshViewer();
    viewer.setMesh(session.mesh);
    session.onChange((s) => viewer.setMesh(s.mesh));

    // step 0: fresh session mirrors the server
    expect(session.doc.faces).toBe(8);
    expect(viewer.triangleCount).toBe(8);
    expect(
      sameTriangles(session.mesh, parseObj(await transport.getMeshObj(session.doc.id))),
    ).toBe(true);
    const initialTriangles = triangleSet(session.mesh);
    const initialSketch = session.keptClasses.slice();

    // step 1: draw addition strokes on background and submit
    const sketchBefore = session.keptClasses.slice();
    for (const path of backgroundPaths(session, 3)) {
      session.drawStroke(path, 1);
    }
    expect(session.canSubmit("add")).toBe(true);
    expect(await session.submit("add")).toBe(true);
    expect(session.toast).toBeNull();
    expect(session.doc.faces).toBe(12);
    expect(session.doc.added_faces).toBe(4);
    expect(viewer.triangleCount).toBe(12);
    expect(
      sameTriangles(session.mesh, parseObj(await transport.getMeshObj(session.doc.id))),
    ).toBe(true);

    // step 2: erase exactly the strokes the addition brought in
    const added: Array<{ x: number; y: number }> = [];
    for (let i = 0; i < session.keptClasses.length; i++) {
      if (session.keptClasses[i] === KEPT && sketchBefore[i] !== KEPT) {
        added.push({ x: i % SIZE, y: Math.floor(i / SIZE) });
      }
    }
    expect(added.length).toBeGreaterThan(20);
    for (const p of added) {
      session.eraseStroke([p], 0);
    }
    expect(session.canSubmit("delete")).toBe(true);
    expect(await session.submit("delete")).toBe(true);
    expect(session.toast).toBeNull();
    expect(session.doc.faces).toBe(8);
    expect(viewer.triangleCount).toBe(8);
    expect(
      sameTriangles(session.mesh, parseObj(await transport.getMeshObj(session.doc.id))),
    ).toBe(true);
    // the delete removed the oracle's part and nothing else
    expect(triangleSet(session.mesh)).toEqual(initialTriangles);
    expect(session.keptClasses).toEqual(initialSketch);

    // step 3: two undos walk history back; a third is refused
    expect(await session.undoEdit()).toBe(true);
    expect(session.doc.faces).toBe(12);
    expect(viewer.triangleCount).toBe(12);
    expect(await session.undoEdit()).toBe(true);
    expect(session.doc.faces).toBe(8);
    expect(triangleSet(session.mesh)).toEqual(initialTriangles);
    expect(await session.undoEdit()).toBe(false);
    expect(session.toast).toMatch(/nothing to undo/);
  });

  it("server rejection of bad addition strokes preserves client state", async () => {
    const initialObj = readFileSync(join(FIXTURES, "initial.obj"), "utf8");
    const session = await UiSession.create(transport, {
      obj: initialObj,
      bins: 128,
      azimuth: 30,
      elevation: 30,
      image_size: SIZE,
    });
    // draw exactly on existing ink: invalid for an addition
    const inked: Array<{ x: number; y: number }> = [];
    for (let i = 0; i < session.keptClasses.length && inked.length < 30; i++) {
      if (session.keptClasses[i] === KEPT) {
        inked.push({ x: i % SIZE, y: Math.floor(i / SIZE) });
      }
    }
    for (const p of inked) {
      session.drawStroke([p], 0);
    }
    const facesBefore = session.doc.faces;
    const pendingBefore = session.pending.mask.slice();
    expect(await session.submit("add")).toBe(false);
    expect(session.toast).toBeTruthy();
    expect(session.doc.faces).toBe(facesBefore);
    expect(session.pending.mask).toEqual(pendingBefore);
    // the strokes stay local: the server sketch still has no red and a
    // resubmit after undoing the strokes is possible
    while (session.undoStroke("add")) {
      // pop every stroke
    }
    expect(session.canSubmit("add")).toBe(false);
  });

  it("empty create yields an empty mesh and a blank sketch", async () => {
    const session = await UiSession.create(transport, { image_size: 64 });
    expect(session.doc.faces).toBe(0);
    expect(session.mesh.faces).toHaveLength(0);
    expect(session.keptInkMask().reduce((a, b) => a + b, 0)).toBe(0);
    const viewer = new MeshViewer();
    viewer.setMesh(session.mesh);
    expect(viewer.triangleCount).toBe(0);
  });
});
