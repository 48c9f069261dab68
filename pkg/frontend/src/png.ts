/**
 * Sketch PNG codec.
 *
 * Sketches are three-colour images: white background, black kept strokes,
 * red pending/erase strokes. The service speaks 8-bit RGB PNGs and rejects
 * any other pixel colour, so both directions here are strict about the
 * palette.
 *
 * Encoding writes filter-0 scanlines inside stored (uncompressed) deflate
 * blocks. That keeps the bytes fully deterministic — the same classes array
 * always produces the identical file, which the fixture tests pin down.
 * Decoding accepts anything the service can produce: zlib-compressed IDAT,
 * adaptive per-row filters, multiple IDAT chunks.
 */

import { inflate } from "pako";

export const BACKGROUND = 0;
export const KEPT = 1;
export const EDIT = 2;

export type SketchClass = typeof BACKGROUND | typeof KEPT | typeof EDIT;

const CLASS_RGB: ReadonlyArray<readonly [number, number, number]> = [
  [0xff, 0xff, 0xff], // background
  [0x00, 0x00, 0x00], // kept stroke
  [0xff, 0x00, 0x00], // edit stroke
];

export interface SketchBitmap {
  width: number;
  height: number;
  /** Row-major class indices, one byte per pixel. */
  classes: Uint8Array;
}

export class PngFormatError extends Error {}

// --- CRC-32 (IEEE) and Adler-32, as required by the PNG container ---

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(bytes: Uint8Array, start: number, end: number): number {
  let c = 0xffffffff;
  for (let i = start; i < end; i++) {
    c = CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function adler32(bytes: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (let i = 0; i < bytes.length; i++) {
    a = (a + bytes[i]) % 65521;
    b = (b + a) % 65521;
  }
  return ((b << 16) | a) >>> 0;
}

// --- encoding ---

const SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];
const MAX_STORED_BLOCK = 0xffff;

class ByteWriter {
  private chunks: Uint8Array[] = [];

  push(bytes: Uint8Array | number[]): void {
    this.chunks.push(bytes instanceof Uint8Array ? bytes : Uint8Array.from(bytes));
  }

  u32(value: number): void {
    this.push([(value >>> 24) & 0xff, (value >>> 16) & 0xff, (value >>> 8) & 0xff, value & 0xff]);
  }

  concat(): Uint8Array {
    const total = this.chunks.reduce((sum, c) => sum + c.length, 0);
    const out = new Uint8Array(total);
    let at = 0;
    for (const c of this.chunks) {
      out.set(c, at);
      at += c.length;
    }
    return out;
  }
}

function chunk(type: string, body: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + body.length);
  const view = new DataView(out.buffer);
  view.setUint32(0, body.length);
  for (let i = 0; i < 4; i++) out[4 + i] = type.charCodeAt(i);
  out.set(body, 8);
  view.setUint32(8 + body.length, crc32(out, 4, 8 + body.length));
  return out;
}

/** Wrap raw bytes in a zlib stream of stored deflate blocks. */
function zlibStored(raw: Uint8Array): Uint8Array {
  const w = new ByteWriter();
  w.push([0x78, 0x01]); // CMF/FLG: 32k window, no preset dict, check bits ok
  for (let at = 0; at < raw.length || raw.length === 0; at += MAX_STORED_BLOCK) {
    const len = Math.min(MAX_STORED_BLOCK, raw.length - at);
    const final = at + len >= raw.length ? 1 : 0;
    w.push([final, len & 0xff, (len >>> 8) & 0xff, ~len & 0xff, (~len >>> 8) & 0xff]);
    w.push(raw.subarray(at, at + len));
    if (final) break;
  }
  w.u32(adler32(raw));
  return w.concat();
}

/**
 * Encode a class bitmap as a deterministic RGB PNG.
 *
 * Throws PngFormatError if the classes array holds anything outside
 * {BACKGROUND, KEPT, EDIT} or does not match width*height.
 */
export function encodeSketchPng(bitmap: SketchBitmap): Uint8Array {
  const { width, height, classes } = bitmap;
  if (width <= 0 || height <= 0) {
    throw new PngFormatError("sketch dimensions must be positive");
  }
  if (classes.length !== width * height) {
    throw new PngFormatError(
      `classes length ${classes.length} does not match ${width}x${height}`,
    );
  }
  const stride = 1 + width * 3;
  const raw = new Uint8Array(stride * height);
  for (let y = 0; y < height; y++) {
    const row = y * stride;
    raw[row] = 0; // filter type: none
    for (let x = 0; x < width; x++) {
      const cls = classes[y * width + x];
      const rgb = CLASS_RGB[cls];
      if (rgb === undefined) {
        throw new PngFormatError(`class ${cls} at (${x}, ${y}) is not a sketch class`);
      }
      const at = row + 1 + x * 3;
      raw[at] = rgb[0];
      raw[at + 1] = rgb[1];
      raw[at + 2] = rgb[2];
    }
  }

  const ihdr = new Uint8Array(13);
  const ihdrView = new DataView(ihdr.buffer);
  ihdrView.setUint32(0, width);
  ihdrView.setUint32(4, height);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 2; // colour type: truecolour RGB
  // compression 0, filter 0, interlace 0 already zeroed

  const w = new ByteWriter();
  w.push(SIGNATURE);
  w.push(chunk("IHDR", ihdr));
  w.push(chunk("IDAT", zlibStored(raw)));
  w.push(chunk("IEND", new Uint8Array(0)));
  return w.concat();
}

// --- decoding ---

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

function unfilter(raw: Uint8Array, width: number, height: number, bpp: number): Uint8Array {
  const stride = width * bpp;
  const out = new Uint8Array(stride * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const src = y * (stride + 1) + 1;
    const dst = y * stride;
    const prev = dst - stride;
    for (let i = 0; i < stride; i++) {
      const x = raw[src + i];
      const left = i >= bpp ? out[dst + i - bpp] : 0;
      const up = y > 0 ? out[prev + i] : 0;
      const upLeft = y > 0 && i >= bpp ? out[prev + i - bpp] : 0;
      let value: number;
      switch (filter) {
        case 0:
          value = x;
          break;
        case 1:
          value = x + left;
          break;
        case 2:
          value = x + up;
          break;
        case 3:
          value = x + ((left + up) >> 1);
          break;
        case 4:
          value = x + paeth(left, up, upLeft);
          break;
        default:
          throw new PngFormatError(`row ${y}: unknown filter type ${filter}`);
      }
      out[dst + i] = value & 0xff;
    }
  }
  return out;
}

/**
 * Decode a sketch PNG into its class bitmap.
 *
 * Accepts 8-bit RGB or RGBA PNGs; every pixel must be one of the three
 * sketch colours (alpha, when present, must be 255). Chunk CRCs are
 * checked. Throws PngFormatError on anything off-contract.
 */
export function decodeSketchPng(bytes: Uint8Array): SketchBitmap {
  if (bytes.length < 8 || SIGNATURE.some((b, i) => bytes[i] !== b)) {
    throw new PngFormatError("not a PNG file");
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  let at = 8;
  let width = 0;
  let height = 0;
  let bpp = 0;
  const idat: Uint8Array[] = [];
  let sawIhdr = false;
  let sawIend = false;
  while (at < bytes.length) {
    if (at + 8 > bytes.length) throw new PngFormatError("truncated chunk header");
    const length = view.getUint32(at);
    const type = String.fromCharCode(bytes[at + 4], bytes[at + 5], bytes[at + 6], bytes[at + 7]);
    const bodyStart = at + 8;
    const bodyEnd = bodyStart + length;
    if (bodyEnd + 4 > bytes.length) throw new PngFormatError(`truncated ${type} chunk`);
    const crc = view.getUint32(bodyEnd);
    if (crc !== crc32(bytes, at + 4, bodyEnd)) {
      throw new PngFormatError(`${type} chunk CRC mismatch`);
    }
    if (type === "IHDR") {
      if (length !== 13) throw new PngFormatError("bad IHDR length");
      width = view.getUint32(bodyStart);
      height = view.getUint32(bodyStart + 4);
      const bitDepth = bytes[bodyStart + 8];
      const colourType = bytes[bodyStart + 9];
      const interlace = bytes[bodyStart + 12];
      if (bitDepth !== 8) throw new PngFormatError(`unsupported bit depth ${bitDepth}`);
      if (colourType === 2) bpp = 3;
      else if (colourType === 6) bpp = 4;
      else throw new PngFormatError(`unsupported colour type ${colourType}`);
      if (interlace !== 0) throw new PngFormatError("interlaced PNGs are not supported");
      sawIhdr = true;
    } else if (type === "IDAT") {
      idat.push(bytes.subarray(bodyStart, bodyEnd));
    } else if (type === "IEND") {
      sawIend = true;
      break;
    }
    at = bodyEnd + 4;
  }
  if (!sawIhdr || !sawIend || idat.length === 0) {
    throw new PngFormatError("missing IHDR, IDAT, or IEND");
  }

  const compressed = new Uint8Array(idat.reduce((sum, c) => sum + c.length, 0));
  let off = 0;
  for (const c of idat) {
    compressed.set(c, off);
    off += c.length;
  }
  let raw: Uint8Array;
  try {
    raw = inflate(compressed);
  } catch (err) {
    throw new PngFormatError(`IDAT inflate failed: ${String(err)}`);
  }
  const stride = 1 + width * bpp;
  if (raw.length !== stride * height) {
    throw new PngFormatError(
      `decompressed pixel data is ${raw.length} bytes, expected ${stride * height}`,
    );
  }
  const pixels = unfilter(raw, width, height, bpp);

  const classes = new Uint8Array(width * height);
  for (let i = 0; i < width * height; i++) {
    const r = pixels[i * bpp];
    const g = pixels[i * bpp + 1];
    const b = pixels[i * bpp + 2];
    if (bpp === 4 && pixels[i * bpp + 3] !== 255) {
      throw new PngFormatError(`pixel ${i} is not opaque`);
    }
    let cls = -1;
    for (let c = 0; c < CLASS_RGB.length; c++) {
      const [cr, cg, cb] = CLASS_RGB[c];
      if (r === cr && g === cg && b === cb) {
        cls = c;
        break;
      }
    }
    if (cls < 0) {
      throw new PngFormatError(`pixel colour (${r}, ${g}, ${b}) is not a sketch class`);
    }
    classes[i] = cls;
  }
  return { width, height, classes };
}
