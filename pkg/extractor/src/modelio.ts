/**
 * Disk IO for TensorFlow.js layers models without the node bindings.
 *
 * The browser-oriented tfjs package has no "file://" handler, so models
 * saved in the standard layout (model.json + binary weight shards) are
 * loaded through a small custom IOHandler that reads the files with fs.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

function concatBuffers(buffers: Buffer[]): ArrayBuffer {
  const total = buffers.reduce((s, b) => s + b.length, 0);
  const out = new Uint8Array(total);
  let off = 0;
  for (const b of buffers) {
    out.set(b, off);
    off += b.length;
  }
  return out.buffer;
}

/** Loads a layers model from a model.json path or its directory. */
export async function loadModelFromDisk(
  modelPath: string,
): Promise<tf.LayersModel> {
  let jsonPath = modelPath;
  if (fs.statSync(modelPath).isDirectory()) {
    jsonPath = path.join(modelPath, "model.json");
  }
  const dir = path.dirname(jsonPath);
  const manifest = JSON.parse(fs.readFileSync(jsonPath, "utf-8"));

  const handler: tf.io.IOHandler = {
    load: async () => {
      const weightSpecs: tf.io.WeightsManifestEntry[] = [];
      const buffers: Buffer[] = [];
      for (const group of manifest.weightsManifest ?? []) {
        weightSpecs.push(...group.weights);
        for (const p of group.paths) {
          buffers.push(fs.readFileSync(path.join(dir, p)));
        }
      }
      return {
        modelTopology: manifest.modelTopology,
        format: manifest.format,
        generatedBy: manifest.generatedBy,
        convertedBy: manifest.convertedBy,
        weightSpecs,
        weightData: concatBuffers(buffers),
      };
    },
  };
  return tf.loadLayersModel(handler);
}

/** Saves a model in the standard model.json + weights.bin layout. */
export async function saveModelToDisk(
  model: tf.LayersModel,
  dir: string,
): Promise<string> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(weightData));
      const manifest = {
        format: "layers-model",
        generatedBy: "extractor-tests",
        convertedBy: null,
        modelTopology: artifacts.modelTopology,
        weightsManifest: [
          { paths: ["weights.bin"], weights: artifacts.weightSpecs },
        ],
      };
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify(manifest),
      );
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
    }),
  );
  return path.join(dir, "model.json");
}
