import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { execFileSync } from "child_process";

import * as tf from "@tensorflow/tfjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { decodeActv, encodeActv, readActivationFile } from "../src/actv";
import { mulberry32, sampleIndices } from "../src/dataset";
import { extract } from "../src/extract";
import { loadModelFromDisk, saveModelToDisk } from "../src/modelio";

let tmp: string;

beforeAll(() => {
  tmp = fs.mkdtempSync(path.join(os.tmpdir(), "extractor-"));
});

afterAll(() => {
  fs.rmSync(tmp, { recursive: true, force: true });
});

function writeDataset(
  file: string,
  inputs: number[][],
  labels: number[],
  test?: { inputs: number[][]; labels: number[] },
) {
  const data: Record<string, unknown> = { train: { inputs, labels } };
  if (test) data.test = test;
  fs.writeFileSync(file, JSON.stringify(data));
}

describe("actv binary format", () => {
  it("round-trips values, shape, and labels exactly", () => {
    const m = {
      values: new Float64Array([1.5, -2.25, 3.125, 0.0078125, 6, 7]),
      nNodes: 2,
      nInputs: 3,
      nodeIds: ["a", "b"],
      inputLabels: new Uint32Array([0, 2, 1]),
    };
    const back = decodeActv(encodeActv(m), m.nodeIds);
    expect(Array.from(back.values)).toEqual(Array.from(m.values));
    expect(back.nNodes).toBe(2);
    expect(back.nInputs).toBe(3);
    expect(Array.from(back.inputLabels!)).toEqual([0, 2, 1]);
  });

  it("rejects bad magic and truncation", () => {
    const buf = encodeActv({
      values: new Float64Array([1]),
      nNodes: 1,
      nInputs: 1,
      nodeIds: ["a"],
    });
    const bad = Buffer.from(buf);
    bad.write("NOPE", 0, "ascii");
    expect(() => decodeActv(bad)).toThrow(/magic/);
    expect(() => decodeActv(buf.subarray(0, buf.length - 1))).toThrow(
      /expected/,
    );
  });

  it("rejects non-finite values", () => {
    expect(() =>
      encodeActv({
        values: new Float64Array([1, NaN]),
        nNodes: 1,
        nInputs: 2,
        nodeIds: ["a"],
      }),
    ).toThrow(/non-finite/);
  });
});

describe("deterministic input sampling", () => {
  it("is a fixed function of the seed", () => {
    expect(sampleIndices(100, 10, 7)).toEqual(sampleIndices(100, 10, 7));
    expect(sampleIndices(100, 10, 7)).not.toEqual(sampleIndices(100, 10, 8));
  });

  it("yields distinct in-range indices", () => {
    const idx = sampleIndices(50, 50, 3);
    expect(new Set(idx).size).toBe(50);
    expect(Math.min(...idx)).toBe(0);
    expect(Math.max(...idx)).toBe(49);
  });

  it("mulberry32 stays in [0, 1)", () => {
    const rand = mulberry32(123);
    for (let i = 0; i < 1000; i++) {
      const v = rand();
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThan(1);
    }
  });
});

describe("extraction", () => {
  it("identity toy model: 1 dense unit, weight 1, bias 0 -> row (1,2,3)", async () => {
    const model = tf.sequential({
      layers: [
        tf.layers.dense({ inputShape: [1], units: 1, useBias: true }),
      ],
    });
    model.layers[0].setWeights([tf.tensor2d([[1]]), tf.tensor1d([0])]);
    const dir = path.join(tmp, "identity");
    await saveModelToDisk(model, dir);
    const dataFile = path.join(tmp, "identity.json");
    writeDataset(dataFile, [[1], [2], [3]], [0, 0, 0]);

    const stem = path.join(tmp, "identity-out");
    await extract({
      modelPath: dir,
      datasetPath: dataFile,
      nInputs: 3,
      seed: 0,
      outStem: stem,
    });
    const m = readActivationFile(`${stem}.actv`);
    expect(m.nNodes).toBe(1);
    expect(m.nInputs).toBe(3);
    // Sampling permutes the columns; the multiset is the identity image.
    expect(Array.from(m.values).sort()).toEqual([1, 2, 3]);
  });

  it("matches an independent forward pass within 1e-5 on 5 inputs", async () => {
    // Two-layer network with fixed weights; the oracle below recomputes
    // every activation from the raw weight values without tfjs graph code.
    const model = tf.sequential({
      layers: [
        tf.layers.dense({ inputShape: [3], units: 4, activation: "relu" }),
        tf.layers.dense({ units: 2, activation: "sigmoid" }),
      ],
    });
    const w1 = [
      [0.5, -0.25, 0.125, 1.0],
      [-0.75, 0.5, 0.25, -0.125],
      [0.25, 0.125, -0.5, 0.75],
    ];
    const b1 = [0.1, -0.2, 0.05, 0.0];
    const w2 = [
      [1.0, -0.5],
      [0.25, 0.75],
      [-0.125, 0.5],
      [0.5, -0.25],
    ];
    const b2 = [0.0, 0.1];
    model.layers[0].setWeights([tf.tensor2d(w1), tf.tensor1d(b1)]);
    model.layers[1].setWeights([tf.tensor2d(w2), tf.tensor1d(b2)]);

    const dir = path.join(tmp, "mlp");
    await saveModelToDisk(model, dir);
    const inputs = [
      [0.3, -1.2, 0.7],
      [1.1, 0.0, -0.4],
      [-0.6, 0.9, 0.2],
      [0.0, 0.0, 0.0],
      [2.0, -0.5, 1.5],
    ];
    const dataFile = path.join(tmp, "mlp.json");
    writeDataset(dataFile, inputs, [0, 1, 0, 1, 0], {
      inputs: inputs.slice(0, 2),
      labels: [0, 1],
    });

    const stem = path.join(tmp, "mlp-out");
    await extract({
      modelPath: dir,
      datasetPath: dataFile,
      nInputs: 5,
      seed: 11,
      outStem: stem,
    });
    const m = readActivationFile(`${stem}.actv`);
    expect(m.nNodes).toBe(6); // 4 hidden + 2 output units
    expect(m.nInputs).toBe(5);

    const relu = (v: number) => Math.max(0, v);
    const sigmoid = (v: number) => 1 / (1 + Math.exp(-v));
    const oracle = (x: number[]) => {
      const h = b1.map((b, j) =>
        relu(b + x.reduce((s, xi, i) => s + xi * w1[i][j], 0)),
      );
      const o = b2.map((b, j) =>
        sigmoid(b + h.reduce((s, hi, i) => s + hi * w2[i][j], 0)),
      );
      return [...h, ...o];
    };
    const order = sampleIndices(5, 5, 11);
    for (let col = 0; col < 5; col++) {
      const expected = oracle(inputs[order[col]]);
      for (let node = 0; node < 6; node++) {
        expect(m.values[node * 5 + col]).toBeCloseTo(expected[node], 5);
      }
    }

    const meta = JSON.parse(fs.readFileSync(`${stem}.meta.json`, "utf-8"));
    expect(meta.node_ids).toHaveLength(6);
    expect(meta.node_ids[0]).toBe("L0:U0");
    expect(meta.train_accuracy).toBeGreaterThanOrEqual(0);
    expect(meta.test_accuracy).toBeLessThanOrEqual(1);
  });

  it("pre-activation mode removes the nonlinearity", async () => {
    const model = tf.sequential({
      layers: [
        tf.layers.dense({ inputShape: [1], units: 1, activation: "relu" }),
      ],
    });
    model.layers[0].setWeights([tf.tensor2d([[1]]), tf.tensor1d([0])]);
    const dir = path.join(tmp, "pre");
    await saveModelToDisk(model, dir);
    const dataFile = path.join(tmp, "pre.json");
    writeDataset(dataFile, [[-2], [3]], [0, 0]);

    const post = path.join(tmp, "pre-out-post");
    const pre = path.join(tmp, "pre-out-pre");
    await extract({
      modelPath: dir, datasetPath: dataFile, nInputs: 2, seed: 0,
      outStem: post,
    });
    await extract({
      modelPath: dir, datasetPath: dataFile, nInputs: 2, seed: 0,
      outStem: pre, postActivation: false,
    });
    const postVals = Array.from(readActivationFile(`${post}.actv`).values).sort();
    const preVals = Array.from(readActivationFile(`${pre}.actv`).values).sort();
    expect(postVals).toEqual([0, 3]); // relu clips the negative input
    expect(preVals).toEqual([-2, 3]);
  });

  it("pools conv channels into one node each", async () => {
    const model = tf.sequential({
      layers: [
        tf.layers.conv2d({
          inputShape: [4, 4, 1],
          filters: 2,
          kernelSize: 1,
          activation: "linear",
        }),
      ],
    });
    // 1x1 kernels scale the input by 2 and -1 respectively; pooling then
    // averages over the 4x4 map, so each node equals scale * mean(input).
    model.layers[0].setWeights([
      tf.tensor4d([2, -1], [1, 1, 1, 2]),
      tf.tensor1d([0, 0]),
    ]);
    const dir = path.join(tmp, "conv");
    await saveModelToDisk(model, dir);
    const img = Array.from({ length: 4 }, (_, y) =>
      Array.from({ length: 4 }, (_, x) => [y * 4 + x + 1]),
    );
    const mean = 8.5; // mean of 1..16
    const dataFile = path.join(tmp, "conv.json");
    fs.writeFileSync(
      dataFile,
      JSON.stringify({ train: { inputs: [img], labels: [0] } }),
    );

    const stem = path.join(tmp, "conv-out");
    const m = await extract({
      modelPath: dir, datasetPath: dataFile, nInputs: 1, seed: 0,
      outStem: stem,
    });
    expect(m.nodeIds).toEqual(["L0:C0", "L0:C1"]);
    expect(m.values[0]).toBeCloseTo(2 * mean, 4);
    expect(m.values[1]).toBeCloseTo(-mean, 4);

    const perPos = await extract({
      modelPath: dir, datasetPath: dataFile, nInputs: 1, seed: 0,
      outStem: path.join(tmp, "conv-out-pp"), perPosition: true,
    });
    expect(perPos.nNodes).toBe(32); // 4 x 4 x 2
    expect(perPos.nodeIds[0]).toBe("L0:C0@0,0");
  });

  it("output parses through the primary toolkit's reader", async () => {
    const stem = path.join(tmp, "mlp-out"); // written by the oracle test
    const script = [
      "import sys, json, numpy as np",
      "from topogap import load_with_metadata",
      "m, record = load_with_metadata(sys.argv[1])",
      "assert m.values.shape == (6, 5), m.values.shape",
      "assert np.isfinite(m.values).all()",
      "assert record.generalization_gap is not None",
      "print(json.dumps({'nodes': m.n_nodes, 'inputs': m.n_inputs}))",
    ].join("\n");
    const out = execFileSync(
      "python3",
      ["-c", script, `${stem}.actv`],
      { encoding: "utf-8" },
    );
    expect(JSON.parse(out.trim())).toEqual({ nodes: 6, inputs: 5 });
  });

  it("is deterministic given the seed", async () => {
    const stemA = path.join(tmp, "det-a");
    const stemB = path.join(tmp, "det-b");
    const dir = path.join(tmp, "mlp");
    const dataFile = path.join(tmp, "mlp.json");
    await extract({
      modelPath: dir, datasetPath: dataFile, nInputs: 3, seed: 99,
      outStem: stemA,
    });
    await extract({
      modelPath: dir, datasetPath: dataFile, nInputs: 3, seed: 99,
      outStem: stemB,
    });
    expect(fs.readFileSync(`${stemA}.actv`)).toEqual(
      fs.readFileSync(`${stemB}.actv`),
    );
  });

  it("loadModelFromDisk restores weights exactly", async () => {
    const model = tf.sequential({
      layers: [tf.layers.dense({ inputShape: [2], units: 3 })],
    });
    const dir = path.join(tmp, "roundtrip");
    await saveModelToDisk(model, dir);
    const back = await loadModelFromDisk(path.join(dir, "model.json"));
    const orig = model.getWeights().map((w) => Array.from(w.dataSync()));
    const loaded = back.getWeights().map((w) => Array.from(w.dataSync()));
    expect(loaded).toEqual(orig);
  });
});
