#!/usr/bin/env node
import { parseArgs } from "node:util";

import { calibrateCrop } from "./calibrate.js";
import { CropSpec, loadImageFile, parseCropSpec } from "./image.js";
import { loadModels, preparePatch } from "./models.js";
import { serve } from "./server.js";

function usage(): never {
  process.stderr.write(
    [
      "usage:",
      "  model-worker serve --models stub|DIR [--crop SPEC|auto] [--device NAME]",
      "  model-worker calibrate --models stub|DIR [--samples N] [--seed S]",
      "  model-worker embed --image PATH --models stub|DIR [--crop SPEC|auto]",
      "",
    ].join("\n")
  );
  process.exit(1);
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  if (!command) usage();

  if (command === "serve") {
    const { values } = parseArgs({
      args: rest,
      options: {
        models: { type: "string", default: "stub" },
        crop: { type: "string", default: "auto" },
        device: { type: "string", default: "cpu" },
      },
    });
    return serve({
      models: values.models!,
      crop: values.crop!,
      device: values.device!,
      input: process.stdin,
      output: process.stdout,
    });
  }

  if (command === "calibrate") {
    const { values } = parseArgs({
      args: rest,
      options: {
        models: { type: "string", default: "stub" },
        samples: { type: "string", default: "10000" },
        seed: { type: "string", default: "0" },
      },
    });
    const models = loadModels(values.models!);
    const report = calibrateCrop(models, Number(values.samples), Number(values.seed));
    process.stdout.write(JSON.stringify(report, null, 2) + "\n");
    return 0;
  }

  if (command === "embed") {
    const { values } = parseArgs({
      args: rest,
      options: {
        image: { type: "string" },
        models: { type: "string", default: "stub" },
        crop: { type: "string", default: "auto" },
      },
    });
    if (!values.image) usage();
    const models = loadModels(values.models!);
    let fixedCrop: CropSpec | null = null;
    if (values.crop !== "auto") {
      fixedCrop = parseCropSpec(values.crop!, models.detectSize, models.detectSize);
    }
    const embedding = models.embed(preparePatch(models, loadImageFile(values.image), fixedCrop));
    process.stdout.write(JSON.stringify(Array.from(embedding)) + "\n");
    return 0;
  }

  usage();
}

main()
  .then((code) => {
    process.exitCode = code;
  })
  .catch((e) => {
    process.stderr.write(`model-worker: ${e instanceof Error ? e.message : e}\n`);
    process.exitCode = 1;
  });
