import * as fs from "node:fs";

import { ArrayView, elementType, isPacked, packedCopy, view, viewBytes } from "./views.js";

export const MAGIC = "SQME";
export const FORMAT_VERSION = 1;
export const ELEM_F32 = 1;

// magic[4] | version u8 | elemtype u8 | rows u64 LE | cols u64 LE
export const HEADER_BYTES = 22;

function packHeader(rows: number, cols: number): Buffer {
  const h = Buffer.alloc(HEADER_BYTES);
  h.write(MAGIC, 0, "ascii");
  h.writeUInt8(FORMAT_VERSION, 4);
  h.writeUInt8(ELEM_F32, 5);
  h.writeBigUInt64LE(BigInt(rows), 6);
  h.writeBigUInt64LE(BigInt(cols), 14);
  return h;
}

/**
 * Write a matrix in the binary embedding format.
 *
 * Only f32 views go on this path; the payload is handed to the OS as a
 * Buffer window over the caller's own memory, so a packed view is written
 * without duplicating the data. f64 data belongs in the CSV format, which
 * keeps full precision.
 *
 * Returns the payload Buffer that was written, which for a packed view
 * aliases `m.data.buffer`.
 */
export function writeMatrix(path: string, m: ArrayView): Buffer {
  if (elementType(m) !== "f32") {
    throw new Error("writeMatrix takes f32 views; use writeMatrixCsv for f64 data");
  }
  const packed = isPacked(m) ? m : packedCopy(m);
  const payload = viewBytes(packed);
  const fd = fs.openSync(path, "w");
  try {
    fs.writevSync(fd, [packHeader(m.rows, m.cols), payload]);
  } finally {
    fs.closeSync(fd);
  }
  return payload;
}

/**
 * Read a binary embedding file back into an f32 view.
 *
 * The 22-byte header leaves the payload misaligned for a Float32Array
 * window, so the values are copied once into a fresh buffer.
 */
export function readMatrix(path: string): ArrayView {
  const raw = fs.readFileSync(path);
  if (raw.length < HEADER_BYTES) {
    throw new Error(`${path}: truncated header (${raw.length} of ${HEADER_BYTES} bytes)`);
  }
  if (raw.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error(`${path}: bad magic at byte 0`);
  }
  const version = raw.readUInt8(4);
  if (version !== FORMAT_VERSION) {
    throw new Error(`${path}: unsupported version ${version} at byte 4`);
  }
  const elem = raw.readUInt8(5);
  if (elem !== ELEM_F32) {
    throw new Error(`${path}: unsupported element type ${elem} at byte 5`);
  }
  const rows = toCount(raw.readBigUInt64LE(6), path, "rows");
  const cols = toCount(raw.readBigUInt64LE(14), path, "cols");
  const expected = rows * cols * 4;
  const got = raw.length - HEADER_BYTES;
  if (got !== expected) {
    throw new Error(
      `${path}: payload holds ${got} bytes at byte ${HEADER_BYTES}, expected ${expected} for ${rows}x${cols}`,
    );
  }
  const data = new Float32Array(rows * cols);
  raw.copy(Buffer.from(data.buffer), 0, HEADER_BYTES);
  return view(data, rows, cols);
}

function toCount(x: bigint, path: string, what: string): number {
  if (x > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new Error(`${path}: ${what} ${x} exceeds the addressable range`);
  }
  return Number(x);
}

// ---------------------------------------------------------------------------
// CSV embeddings

/**
 * Write a matrix as embedding CSV: "dim=<d>", then one row per line.
 *
 * Doubles are serialized with their shortest round-trip decimal form, so a
 * load on the other side recovers the exact values.
 */
export function writeMatrixCsv(path: string, m: ArrayView): void {
  const lines: string[] = [`dim=${m.cols}`];
  for (let i = 0; i < m.rows; i++) {
    const cells: string[] = new Array(m.cols);
    for (let j = 0; j < m.cols; j++) {
      const v = m.data[i * m.rowStride + j]!;
      if (!Number.isFinite(v)) throw new Error(`row ${i}, column ${j}: non-finite value ${v}`);
      cells[j] = String(v);
    }
    lines.push(cells.join(","));
  }
  fs.writeFileSync(path, lines.join("\n") + "\n");
}

export function readMatrixCsv(path: string): ArrayView {
  const lines = fs
    .readFileSync(path, "utf8")
    .split("\n")
    .map((ln) => ln.trim())
    .filter((ln) => ln.length > 0);
  const head = lines[0];
  if (head === undefined || !head.startsWith("dim=")) {
    throw new Error(`${path}: line 1 must be 'dim=<d>'`);
  }
  const cols = Number(head.slice(4));
  if (!Number.isInteger(cols) || cols < 1) {
    throw new Error(`${path}: line 1 has a bad dimension '${head.slice(4)}'`);
  }
  const rows = lines.length - 1;
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < rows; i++) {
    const cells = lines[i + 1]!.split(",");
    if (cells.length !== cols) {
      throw new Error(`${path}: line ${i + 2} has ${cells.length} values, expected ${cols}`);
    }
    for (let j = 0; j < cols; j++) {
      const v = Number(cells[j]);
      if (!Number.isFinite(v)) {
        throw new Error(`${path}: line ${i + 2}, column ${j + 1}: '${cells[j]}' is not a number`);
      }
      data[i * cols + j] = v;
    }
  }
  return view(data, rows, cols);
}

// ---------------------------------------------------------------------------
// property tables

export type PropertyKind = "real" | "binary" | "categorical";

export interface PropertyColumn {
  name: string;
  kind: PropertyKind;
  values: readonly number[] | readonly string[];
}

function csvQuote(cell: string): string {
  if (/[",\r\n]/.test(cell)) return '"' + cell.replaceAll('"', '""') + '"';
  return cell;
}

/** Write property columns as CSV with a typed "name:kind" header row. */
export function writeProperties(path: string, columns: readonly PropertyColumn[]): void {
  if (columns.length === 0) throw new Error("writeProperties needs at least one column");
  const rows = columns[0]!.values.length;
  for (const c of columns) {
    if (c.values.length !== rows) {
      throw new Error(`column '${c.name}' has ${c.values.length} rows, expected ${rows}`);
    }
    if (c.kind !== "real" && c.kind !== "binary" && c.kind !== "categorical") {
      throw new Error(`column '${c.name}' has unknown kind '${(c as PropertyColumn).kind}'`);
    }
  }
  const lines: string[] = [columns.map((c) => csvQuote(`${c.name}:${c.kind}`)).join(",")];
  for (let r = 0; r < rows; r++) {
    const cells: string[] = [];
    for (const c of columns) {
      const v = c.values[r]!;
      if (c.kind === "categorical") {
        cells.push(csvQuote(String(v)));
      } else {
        if (typeof v !== "number" || !Number.isFinite(v)) {
          throw new Error(`column '${c.name}', row ${r}: non-finite value ${v}`);
        }
        cells.push(String(v));
      }
    }
    lines.push(cells.join(","));
  }
  fs.writeFileSync(path, lines.join("\n") + "\n");
}

// ---------------------------------------------------------------------------
// sequence files

/**
 * Write sequences one per line.
 *
 * The reader treats blank lines as padding and a leading ">" as a FASTA
 * header, so those cannot survive the round trip and are rejected here,
 * along with embedded newlines.
 */
export function writeSequences(path: string, sequences: readonly string[]): void {
  if (sequences.length === 0) throw new Error("writeSequences needs at least one sequence");
  for (let i = 0; i < sequences.length; i++) {
    const s = sequences[i]!;
    if (typeof s !== "string" || s.length === 0) {
      throw new Error(`sequence ${i} is empty; the line format cannot represent it`);
    }
    if (s.includes("\n") || s.includes("\r")) {
      throw new Error(`sequence ${i} contains a line break`);
    }
    if (s.trim().length === 0) {
      throw new Error(`sequence ${i} is whitespace only`);
    }
    if (s.startsWith(">")) {
      throw new Error(`sequence ${i} starts with '>', which the reader takes for a FASTA header`);
    }
  }
  fs.writeFileSync(path, sequences.join("\n") + "\n");
}
