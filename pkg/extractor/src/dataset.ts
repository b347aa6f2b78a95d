/**
 * Dataset loading and deterministic input sampling.
 *
 * Datasets are JSON files of the shape
 *   { "train": { "inputs": [...], "labels": [...] },
 *     "test":  { "inputs": [...], "labels": [...] } }   // test optional
 * where each input is a (possibly nested) numeric array and labels are
 * non-negative integer class ids.
 */

import * as fs from "fs";

export interface Split {
  inputs: number[][] | number[][][][];
  labels: number[];
}

export interface Dataset {
  train: Split;
  test?: Split;
}

export function loadDataset(path: string): Dataset {
  const raw = JSON.parse(fs.readFileSync(path, "utf-8"));
  if (!raw.train?.inputs || !raw.train?.labels) {
    throw new Error(`${path}: dataset needs train.inputs and train.labels`);
  }
  for (const key of ["train", "test"] as const) {
    const split = raw[key];
    if (!split) continue;
    if (split.inputs.length !== split.labels.length) {
      throw new Error(`${path}: ${key} inputs/labels length mismatch`);
    }
  }
  return raw as Dataset;
}

/** mulberry32: tiny seeded PRNG, plenty for shuffling input indices. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * First n indices of a seeded Fisher-Yates shuffle of 0..size-1.
 * Deterministic for a given (size, n, seed); order of draws is fixed.
 */
export function sampleIndices(size: number, n: number, seed: number): number[] {
  if (n > size) {
    throw new Error(`cannot sample ${n} inputs from a dataset of ${size}`);
  }
  const rand = mulberry32(seed);
  const idx = Array.from({ length: size }, (_, i) => i);
  for (let i = 0; i < n; i++) {
    const j = i + Math.floor(rand() * (size - i));
    [idx[i], idx[j]] = [idx[j], idx[i]];
  }
  return idx.slice(0, n);
}
