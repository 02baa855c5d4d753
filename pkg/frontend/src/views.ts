import { endianness } from "node:os";

// The wire formats are little-endian; refuse to guess on BE hosts.
if (endianness() !== "LE") {
  throw new Error("seqeval-node requires a little-endian host");
}

export type ElementType = "f32" | "f64";

/**
 * A borrowed, row-major numeric matrix.
 *
 * The view does not own `data`: the caller keeps the buffer alive and must
 * not mutate it while a call is running. `rowStride` counts elements, not
 * bytes, and rows are contiguous within the stride.
 */
export interface ArrayView {
  data: Float32Array | Float64Array;
  rows: number;
  cols: number;
  rowStride: number;
}

export function elementType(v: ArrayView): ElementType {
  return v.data instanceof Float64Array ? "f64" : "f32";
}

/**
 * Wrap a typed array as an ArrayView, checking the geometry.
 * @param data backing values, at least rows * rowStride long
 * @param rows number of points
 * @param cols embedding width
 * @param rowStride elements between row starts; defaults to cols (packed)
 */
export function view(
  data: Float32Array | Float64Array,
  rows: number,
  cols: number,
  rowStride: number = cols,
): ArrayView {
  if (!Number.isInteger(rows) || rows < 0) throw new Error(`rows must be a nonnegative integer, got ${rows}`);
  if (!Number.isInteger(cols) || cols < 1) throw new Error(`cols must be a positive integer, got ${cols}`);
  if (!Number.isInteger(rowStride) || rowStride < cols) {
    throw new Error(`rowStride must be an integer >= cols (${cols}), got ${rowStride}`);
  }
  const needed = rows === 0 ? 0 : (rows - 1) * rowStride + cols;
  if (data.length < needed) {
    throw new Error(`data holds ${data.length} elements, need ${needed} for ${rows}x${cols} stride ${rowStride}`);
  }
  return { data, rows, cols, rowStride };
}

/** Pack nested number arrays into a fresh f64 view. Rows must be equal length. */
export function fromRows(rows: readonly (readonly number[])[]): ArrayView {
  if (rows.length === 0) throw new Error("fromRows needs at least one row");
  const cols = rows[0]!.length;
  if (cols === 0) throw new Error("fromRows needs nonempty rows");
  const data = new Float64Array(rows.length * cols);
  for (let i = 0; i < rows.length; i++) {
    const r = rows[i]!;
    if (r.length !== cols) {
      throw new Error(`row ${i} has ${r.length} values, expected ${cols}`);
    }
    for (let j = 0; j < cols; j++) data[i * cols + j] = r[j]!;
  }
  return { data, rows: rows.length, cols, rowStride: cols };
}

export function isArrayView(x: unknown): x is ArrayView {
  return (
    typeof x === "object" &&
    x !== null &&
    ((x as ArrayView).data instanceof Float32Array || (x as ArrayView).data instanceof Float64Array) &&
    typeof (x as ArrayView).rows === "number" &&
    typeof (x as ArrayView).cols === "number"
  );
}

/** True when rows sit back to back, so the payload is one memcpy-free slab. */
export function isPacked(v: ArrayView): boolean {
  return v.rowStride === v.cols;
}

/**
 * Zero-copy byte window over a packed view's payload.
 *
 * The returned Buffer aliases v.data's memory (same ArrayBuffer); nothing is
 * duplicated. Strided views cannot be exposed as one slab and are rejected,
 * use packedCopy first.
 */
export function viewBytes(v: ArrayView): Buffer {
  if (!isPacked(v)) throw new Error("viewBytes needs a packed view (rowStride == cols)");
  const bytesPerElem = v.data.BYTES_PER_ELEMENT;
  return Buffer.from(v.data.buffer, v.data.byteOffset, v.rows * v.cols * bytesPerElem);
}

/** Compact a strided view into a fresh packed one (copies). */
export function packedCopy(v: ArrayView): ArrayView {
  if (isPacked(v)) return v;
  const out = v.data instanceof Float64Array
    ? new Float64Array(v.rows * v.cols)
    : new Float32Array(v.rows * v.cols);
  for (let i = 0; i < v.rows; i++) {
    for (let j = 0; j < v.cols; j++) {
      out[i * v.cols + j] = v.data[i * v.rowStride + j]!;
    }
  }
  return { data: out, rows: v.rows, cols: v.cols, rowStride: v.cols };
}

export function at(v: ArrayView, row: number, col: number): number {
  return v.data[row * v.rowStride + col]!;
}
