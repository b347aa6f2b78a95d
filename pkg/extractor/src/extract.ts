/**
 * Activation extraction: trained tfjs layers model -> .actv + .meta.json.
 *
 * One matrix row per non-input node, one column per sampled input.
 * Post-nonlinearity activations are the default; `postActivation: false`
 * recomputes pre-activation values for kernel layers (Dense, Conv2D).
 * Convolutional feature maps contribute one node per channel via global
 * average pooling unless `perPosition` asks for one node per
 * (channel, position).
 */

import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import {
  ActivationMatrix,
  ModelMetadata,
  writeActivationFiles,
} from "./actv";
import { Dataset, Split, loadDataset, sampleIndices } from "./dataset";
import { loadModelFromDisk } from "./modelio";

export interface ExtractionSpec {
  modelPath: string;
  datasetPath: string;
  /** Number of dataset inputs to sample (must not exceed train size). */
  nInputs?: number;
  seed?: number;
  /** Post-nonlinearity values (default) vs pre-activation recomputation. */
  postActivation?: boolean;
  /** Conv nodes: one per (channel, position) instead of pooled channels. */
  perPosition?: boolean;
  modelId?: string;
  outStem: string;
}

export const DEFAULT_N_INPUTS = 2000;
const BATCH = 128;

export class UnsupportedLayerError extends Error {}

interface LayerPlan {
  layerIndex: number;
  layer: tf.layers.Layer;
  /** Symbolic tensor to evaluate: the layer output (post) or input (pre). */
  symbolic: tf.SymbolicTensor;
  pre: boolean;
}

function isInputLayer(layer: tf.layers.Layer): boolean {
  return layer.getClassName() === "InputLayer";
}

/** Decides, per layer, what to evaluate; warns and skips unsupported ones. */
function planLayers(model: tf.LayersModel, post: boolean): LayerPlan[] {
  const plans: LayerPlan[] = [];
  model.layers.forEach((layer, layerIndex) => {
    if (isInputLayer(layer)) return;
    const cls = layer.getClassName();
    if (post) {
      const out = layer.output;
      if (Array.isArray(out)) {
        console.warn(
          `UnsupportedLayer: ${layer.name} (${cls}) has multiple outputs; skipped`,
        );
        return;
      }
      const rank = out.shape.length;
      if (rank !== 2 && rank !== 4) {
        console.warn(
          `UnsupportedLayer: ${layer.name} (${cls}) output rank ${rank}; skipped`,
        );
        return;
      }
      plans.push({ layerIndex, layer, symbolic: out, pre: false });
      return;
    }
    // Pre-activation mode: only kernel layers have a distinct pre-activation.
    if (cls !== "Dense" && cls !== "Conv2D") {
      console.warn(
        `UnsupportedLayer: ${layer.name} (${cls}) has no pre-activation; skipped`,
      );
      return;
    }
    const inp = layer.input;
    if (Array.isArray(inp)) {
      console.warn(
        `UnsupportedLayer: ${layer.name} (${cls}) has multiple inputs; skipped`,
      );
      return;
    }
    plans.push({ layerIndex, layer, symbolic: inp, pre: true });
  });
  if (plans.length === 0) {
    throw new UnsupportedLayerError("no supported non-input layers in model");
  }
  return plans;
}

/** Applies the layer's kernel and bias without its nonlinearity. */
function preActivation(layer: tf.layers.Layer, x: tf.Tensor): tf.Tensor {
  const cls = layer.getClassName();
  const weights = layer.getWeights();
  if (cls === "Dense") {
    const [kernel, bias] = weights;
    let y = tf.matMul(x as tf.Tensor2D, kernel as tf.Tensor2D);
    if (bias) y = tf.add(y, bias);
    return y;
  }
  const cfg = layer.getConfig() as {
    strides: [number, number];
    padding: "same" | "valid";
  };
  const [kernel, bias] = weights;
  let y: tf.Tensor = tf.conv2d(
    x as tf.Tensor4D,
    kernel as tf.Tensor4D,
    cfg.strides,
    cfg.padding,
  );
  if (bias) y = tf.add(y, bias);
  return y;
}

/** Node identifiers and per-input node values for one evaluated tensor. */
function tensorToRows(
  plan: LayerPlan,
  value: tf.Tensor,
  perPosition: boolean,
): { nodeIds: string[]; rows: Float32Array; nNodes: number } {
  const prefix = `L${plan.layerIndex}`;
  let t = value;
  const ids: string[] = [];
  if (t.rank === 4) {
    const [, h, w, c] = t.shape as [number, number, number, number];
    if (perPosition) {
      // [batch, h, w, c] -> [batch, h*w*c]; id order matches the reshape.
      for (let y = 0; y < h; y++)
        for (let x = 0; x < w; x++)
          for (let ch = 0; ch < c; ch++) ids.push(`${prefix}:C${ch}@${y},${x}`);
      t = tf.reshape(t, [t.shape[0], h * w * c]);
    } else {
      for (let ch = 0; ch < c; ch++) ids.push(`${prefix}:C${ch}`);
      t = tf.mean(t, [1, 2]);
    }
  } else {
    const units = t.shape[1] as number;
    for (let u = 0; u < units; u++) ids.push(`${prefix}:U${u}`);
  }
  const data = t.dataSync() as Float32Array;
  return { nodeIds: ids, rows: data, nNodes: ids.length };
}

function toInputTensor(split: Split, indices: number[]): tf.Tensor {
  const picked = indices.map((i) => (split.inputs as unknown[])[i]);
  return tf.tensor(picked as number[][]);
}

/** Fraction of inputs whose predicted class matches the label. */
export async function accuracy(
  model: tf.LayersModel,
  split: Split,
): Promise<number> {
  let correct = 0;
  const n = split.labels.length;
  for (let start = 0; start < n; start += BATCH) {
    const idx = Array.from(
      { length: Math.min(BATCH, n - start) },
      (_, i) => start + i,
    );
    const batch = toInputTensor(split, idx);
    const out = model.predict(batch) as tf.Tensor;
    const last = out.shape[out.shape.length - 1] as number;
    const preds =
      last === 1
        ? Array.from(out.dataSync(), (v) => (v >= 0.5 ? 1 : 0))
        : Array.from(tf.argMax(out, -1).dataSync());
    idx.forEach((i, k) => {
      if (preds[k] === split.labels[i]) correct += 1;
    });
    tf.dispose([batch, out]);
  }
  return correct / n;
}

/**
 * Runs the extraction and writes `<outStem>.actv` + `<outStem>.meta.json`.
 * Returns the written matrix for callers that want to inspect it.
 */
export async function extract(spec: ExtractionSpec): Promise<ActivationMatrix> {
  const model = await loadModelFromDisk(spec.modelPath);
  const dataset: Dataset = loadDataset(spec.datasetPath);
  const post = spec.postActivation ?? true;
  const nInputs = spec.nInputs ?? DEFAULT_N_INPUTS;
  const seed = spec.seed ?? 0;
  const trainSize = dataset.train.labels.length;
  const indices = sampleIndices(trainSize, Math.min(nInputs, trainSize), seed);

  const plans = planLayers(model, post);
  const evalModel = tf.model({
    inputs: model.inputs,
    outputs: plans.map((p) => p.symbolic),
  });

  // First pass over one batch fixes node ids and total node count; the
  // column blocks are then filled batch by batch.
  const nCols = indices.length;
  const blocks: { nodeIds: string[]; columns: Float64Array[] }[] = [];
  for (let start = 0; start < nCols; start += BATCH) {
    const batchIdx = indices.slice(start, start + BATCH);
    const x = toInputTensor(dataset.train, batchIdx);
    const raw = evalModel.predict(x) as tf.Tensor | tf.Tensor[];
    const outputs = Array.isArray(raw) ? raw : [raw];
    outputs.forEach((value, pi) => {
      const plan = plans[pi];
      const evaluated = plan.pre ? preActivation(plan.layer, value) : value;
      const { nodeIds, rows, nNodes } = tensorToRows(
        plan,
        evaluated,
        spec.perPosition ?? false,
      );
      if (start === 0) {
        blocks.push({
          nodeIds,
          columns: Array.from(
            { length: nNodes },
            () => new Float64Array(nCols),
          ),
        });
      }
      const block = blocks[pi];
      // rows is [batch, nNodes] flattened row-major.
      for (let b = 0; b < batchIdx.length; b++) {
        for (let node = 0; node < nNodes; node++) {
          block.columns[node][start + b] = rows[b * nNodes + node];
        }
      }
      if (evaluated !== value) evaluated.dispose();
    });
    tf.dispose([x, ...outputs]);
  }

  const nodeIds = blocks.flatMap((b) => b.nodeIds);
  const nNodes = nodeIds.length;
  const values = new Float64Array(nNodes * nCols);
  let row = 0;
  for (const block of blocks) {
    for (const column of block.columns) {
      values.set(column, row * nCols);
      row += 1;
    }
  }

  const labels = new Uint32Array(indices.map((i) => dataset.train.labels[i]));
  const matrix: ActivationMatrix = {
    values,
    nNodes,
    nInputs: nCols,
    nodeIds,
    inputLabels: labels,
  };

  const meta: ModelMetadata = {
    model_id: spec.modelId ?? path.basename(spec.outStem),
    train_accuracy: await accuracy(model, dataset.train),
    node_ids: nodeIds,
    activation_kind: post ? "post" : "pre",
    conv_node_definition: spec.perPosition ? "per_position" : "pooled_channel",
    n_inputs: nCols,
    seed,
  };
  if (dataset.test) {
    meta.test_accuracy = await accuracy(model, dataset.test);
  }
  writeActivationFiles(spec.outStem, matrix, meta);
  return matrix;
}
