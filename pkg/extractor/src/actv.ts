/**
 * Binary activation-matrix file format (.actv).
 *
 * Little-endian layout:
 *   magic "ACTV" | version u32 = 1 | n_nodes u64 | n_inputs u64 |
 *   flags u8 (bit 0: labels present) | float64 row-major values |
 *   optional u32 labels (one per input column).
 */

import * as fs from "fs";

export const MAGIC = "ACTV";
export const FORMAT_VERSION = 1;

const HEADER_SIZE = 4 + 4 + 8 + 8 + 1;

export interface ActivationMatrix {
  /** Row-major n_nodes x n_inputs activation values. */
  values: Float64Array;
  nNodes: number;
  nInputs: number;
  nodeIds: string[];
  inputLabels?: Uint32Array;
}

export function encodeActv(m: ActivationMatrix): Buffer {
  if (m.values.length !== m.nNodes * m.nInputs) {
    throw new Error(
      `values length ${m.values.length} != ${m.nNodes} x ${m.nInputs}`,
    );
  }
  if (m.nodeIds.length !== m.nNodes) {
    throw new Error("nodeIds length must equal nNodes");
  }
  for (const v of m.values) {
    if (!Number.isFinite(v)) throw new Error("non-finite activation value");
  }
  const hasLabels = m.inputLabels !== undefined;
  if (hasLabels && m.inputLabels!.length !== m.nInputs) {
    throw new Error("inputLabels length must equal nInputs");
  }
  const size =
    HEADER_SIZE + 8 * m.values.length + (hasLabels ? 4 * m.nInputs : 0);
  const buf = Buffer.alloc(size);
  let off = buf.write(MAGIC, 0, "ascii");
  off = buf.writeUInt32LE(FORMAT_VERSION, off);
  off = buf.writeBigUInt64LE(BigInt(m.nNodes), off);
  off = buf.writeBigUInt64LE(BigInt(m.nInputs), off);
  off = buf.writeUInt8(hasLabels ? 1 : 0, off);
  for (const v of m.values) off = buf.writeDoubleLE(v, off);
  if (hasLabels) {
    for (const l of m.inputLabels!) off = buf.writeUInt32LE(l, off);
  }
  return buf;
}

export function decodeActv(buf: Buffer, nodeIds?: string[]): ActivationMatrix {
  if (buf.length < HEADER_SIZE) throw new Error("truncated header");
  if (buf.toString("ascii", 0, 4) !== MAGIC) throw new Error("bad magic");
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new Error(`unsupported format version ${version}`);
  }
  const nNodes = Number(buf.readBigUInt64LE(8));
  const nInputs = Number(buf.readBigUInt64LE(16));
  const flags = buf.readUInt8(24);
  const hasLabels = (flags & 1) === 1;
  const expected =
    HEADER_SIZE + 8 * nNodes * nInputs + (hasLabels ? 4 * nInputs : 0);
  if (buf.length !== expected) {
    throw new Error(`expected ${expected} bytes, got ${buf.length}`);
  }
  const values = new Float64Array(nNodes * nInputs);
  let off = HEADER_SIZE;
  for (let i = 0; i < values.length; i++, off += 8) {
    values[i] = buf.readDoubleLE(off);
  }
  let inputLabels: Uint32Array | undefined;
  if (hasLabels) {
    inputLabels = new Uint32Array(nInputs);
    for (let i = 0; i < nInputs; i++, off += 4) {
      inputLabels[i] = buf.readUInt32LE(off);
    }
  }
  return {
    values,
    nNodes,
    nInputs,
    nodeIds: nodeIds ?? Array.from({ length: nNodes }, (_, i) => String(i)),
    inputLabels,
  };
}

export interface ModelMetadata {
  model_id: string;
  train_accuracy: number;
  test_accuracy?: number;
  node_ids: string[];
  [extra: string]: unknown;
}

/** Writes <stem>.actv plus its <stem>.meta.json sidecar atomically. */
export function writeActivationFiles(
  stem: string,
  m: ActivationMatrix,
  meta: ModelMetadata,
): { actvPath: string; metaPath: string } {
  const actvPath = `${stem}.actv`;
  const metaPath = `${stem}.meta.json`;
  const tmp = `${actvPath}.tmp`;
  fs.writeFileSync(tmp, encodeActv(m));
  fs.renameSync(tmp, actvPath);
  fs.writeFileSync(metaPath, JSON.stringify(meta, null, 2) + "\n");
  return { actvPath, metaPath };
}

export function readActivationFile(path: string): ActivationMatrix {
  return decodeActv(fs.readFileSync(path));
}
