/**
 * Freehand stroke rasterization for the sketchpad.
 *
 * Pointer input arrives as sampled positions; consecutive samples are joined
 * with line segments and stamped with a round brush so the painted pixels
 * form connected runs along the pointer path even when events are sparse.
 *
 * A layer remembers, per stroke, exactly the pixels that stroke newly set,
 * so undoing a stroke restores the previous mask bit-for-bit even when
 * strokes overlap.
 */

export interface Point {
  x: number;
  y: number;
}

export class StrokeLayer {
  readonly width: number;
  readonly height: number;
  readonly mask: Uint8Array;
  private strokes: Array<Uint32Array> = [];

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.mask = new Uint8Array(width * height);
  }

  get strokeCount(): number {
    return this.strokes.length;
  }

  get pixelCount(): number {
    let n = 0;
    for (let i = 0; i < this.mask.length; i++) n += this.mask[i];
    return n;
  }

  /**
   * Rasterize one stroke onto the layer.
   *
   * `limitTo`, when given, restricts painting to pixels set in that mask —
   * the eraser passes the kept-ink mask so erasing over empty background
   * is a no-op. Returns the number of newly painted pixels.
   */
  paint(path: Point[], radius = 1, limitTo?: Uint8Array): number {
    const touched: number[] = [];
    const stamp = (cx: number, cy: number) => {
      const r = Math.max(0, Math.floor(radius));
      for (let dy = -r; dy <= r; dy++) {
        for (let dx = -r; dx <= r; dx++) {
          if (dx * dx + dy * dy > r * r) continue;
          const x = Math.round(cx) + dx;
          const y = Math.round(cy) + dy;
          if (x < 0 || y < 0 || x >= this.width || y >= this.height) continue;
          const i = y * this.width + x;
          if (this.mask[i]) continue;
          if (limitTo && !limitTo[i]) continue;
          this.mask[i] = 1;
          touched.push(i);
        }
      }
    };
    for (let k = 0; k < path.length; k++) {
      if (k === 0) {
        stamp(path[0].x, path[0].y);
        continue;
      }
      for (const [x, y] of bresenham(path[k - 1], path[k])) {
        stamp(x, y);
      }
    }
    this.strokes.push(Uint32Array.from(touched));
    return touched.length;
  }

  /** Remove the most recent stroke; returns false when there is none. */
  undo(): boolean {
    const last = this.strokes.pop();
    if (last === undefined) return false;
    for (const i of last) {
      this.mask[i] = 0;
    }
    return true;
  }

  clear(): void {
    this.mask.fill(0);
    this.strokes = [];
  }
}

/** Integer line walk between two sampled pointer positions. */
export function bresenham(a: Point, b: Point): Array<[number, number]> {
  let x0 = Math.round(a.x);
  let y0 = Math.round(a.y);
  const x1 = Math.round(b.x);
  const y1 = Math.round(b.y);
  const dx = Math.abs(x1 - x0);
  const dy = -Math.abs(y1 - y0);
  const sx = x0 < x1 ? 1 : -1;
  const sy = y0 < y1 ? 1 : -1;
  let err = dx + dy;
  const points: Array<[number, number]> = [];
  for (;;) {
    points.push([x0, y0]);
    if (x0 === x1 && y0 === y1) break;
    const e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return points;
}
