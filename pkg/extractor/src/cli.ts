#!/usr/bin/env node
/** CLI: extract --model <path> --data <path> --n 2000 --seed S --out <stem> */

import { parseArgs } from "util";

import { DEFAULT_N_INPUTS, extract } from "./extract";

const USAGE = `usage: extract --model <path> --data <path> [options] --out <stem>

Dumps activation matrices from a trained tfjs layers model into
<stem>.actv + <stem>.meta.json.

options:
  --model <path>    model.json path or its directory (required)
  --data <path>     dataset JSON: {train:{inputs,labels}, test?:{...}} (required)
  --out <stem>      output stem (required)
  --n <int>         inputs to sample from the train split (default ${DEFAULT_N_INPUTS})
  --seed <int>      sampling seed (default 0)
  --model-id <id>   model id for the metadata (default: basename of --out)
  --pre             pre-activation values instead of post-nonlinearity
  --per-position    one conv node per (channel, position), not pooled channels
  --help            show this message`;

export async function main(argv: string[]): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        model: { type: "string" },
        data: { type: "string" },
        out: { type: "string" },
        n: { type: "string" },
        seed: { type: "string" },
        "model-id": { type: "string" },
        pre: { type: "boolean", default: false },
        "per-position": { type: "boolean", default: false },
        help: { type: "boolean", default: false },
      },
    });
  } catch (err) {
    console.error((err as Error).message);
    console.error(USAGE);
    return 1;
  }
  const { values, positionals } = parsed;
  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  if (positionals[0] !== "extract" || !values.model || !values.data || !values.out) {
    console.error(USAGE);
    return 1;
  }
  const n = values.n === undefined ? DEFAULT_N_INPUTS : Number(values.n);
  const seed = values.seed === undefined ? 0 : Number(values.seed);
  if (!Number.isInteger(n) || n < 1 || !Number.isInteger(seed)) {
    console.error("--n must be a positive integer and --seed an integer");
    return 1;
  }

  try {
    const matrix = await extract({
      modelPath: values.model,
      datasetPath: values.data,
      nInputs: n,
      seed,
      outStem: values.out,
      modelId: values["model-id"],
      postActivation: !values.pre,
      perPosition: values["per-position"],
    });
    console.log(
      `wrote ${values.out}.actv: ${matrix.nNodes} nodes x ${matrix.nInputs} inputs`,
    );
    return 0;
  } catch (err) {
    console.error(`extract failed: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
