/**
 * Minimal Wavefront OBJ reading for the viewer and for comparing meshes.
 *
 * The service exports plain `v`/`f` lines with triangular faces; this parser
 * additionally fan-triangulates larger polygons and understands the
 * `f v/vt/vn` index forms so pasted files from other tools still load.
 */

export interface ParsedMesh {
  /** Vertex positions, one [x, y, z] triple per vertex, in file order. */
  vertices: Array<[number, number, number]>;
  /** Triangles as zero-based vertex index triples. */
  faces: Array<[number, number, number]>;
}

export class ObjParseError extends Error {}

function resolveIndex(token: string, vertexCount: number, line: number): number {
  const head = token.split("/", 1)[0];
  const value = Number(head);
  if (!Number.isInteger(value) || value === 0) {
    throw new ObjParseError(`line ${line}: bad vertex index "${token}"`);
  }
  const index = value > 0 ? value - 1 : vertexCount + value;
  if (index < 0 || index >= vertexCount) {
    throw new ObjParseError(`line ${line}: vertex index ${value} out of range`);
  }
  return index;
}

export function parseObj(text: string): ParsedMesh {
  const vertices: Array<[number, number, number]> = [];
  const faces: Array<[number, number, number]> = [];
  const lines = text.split(/\r?\n/);
  for (let n = 0; n < lines.length; n++) {
    const line = lines[n].trim();
    if (line === "" || line.startsWith("#")) continue;
    const parts = line.split(/\s+/);
    const keyword = parts[0];
    if (keyword === "v") {
      if (parts.length < 4) {
        throw new ObjParseError(`line ${n + 1}: vertex needs 3 coordinates`);
      }
      const coords = parts.slice(1, 4).map(Number);
      if (coords.some((c) => !Number.isFinite(c))) {
        throw new ObjParseError(`line ${n + 1}: non-numeric vertex coordinate`);
      }
      vertices.push([coords[0], coords[1], coords[2]]);
    } else if (keyword === "f") {
      if (parts.length < 4) {
        throw new ObjParseError(`line ${n + 1}: face needs at least 3 vertices`);
      }
      const idx = parts.slice(1).map((t) => resolveIndex(t, vertices.length, n + 1));
      for (let k = 1; k + 1 < idx.length; k++) {
        faces.push([idx[0], idx[k], idx[k + 1]]);
      }
    }
    // vn / vt / o / g / usemtl and friends carry nothing the viewer needs
  }
  return { vertices, faces };
}

/**
 * Canonical form of the triangle set, for equality checks between the local
 * viewer mesh and the server's export. Vertex order within a triangle and
 * triangle order in the file are both irrelevant; coordinates are compared
 * after rounding to a fixed decimal precision so that serialisation noise
 * does not register as a geometric difference.
 */
export function triangleKey(
  mesh: ParsedMesh,
  face: [number, number, number],
  decimals = 9,
): string {
  const corner = (i: number) =>
    mesh.vertices[i].map((c) => c.toFixed(decimals)).join(",");
  return face.map(corner).sort().join(";");
}

export function triangleSet(mesh: ParsedMesh, decimals = 9): Set<string> {
  const keys = new Set<string>();
  for (const face of mesh.faces) {
    keys.add(triangleKey(mesh, face, decimals));
  }
  return keys;
}

export function sameTriangles(a: ParsedMesh, b: ParsedMesh, decimals = 9): boolean {
  const sa = triangleSet(a, decimals);
  const sb = triangleSet(b, decimals);
  if (sa.size !== sb.size) return false;
  for (const key of sa) {
    if (!sb.has(key)) return false;
  }
  return true;
}
