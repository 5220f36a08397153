/**
 * Protocol server: speaks the engine's framed JSON protocol over a pipe.
 *
 * On start the worker loads its models and writes a hello frame advertising
 * the negotiated dimensions; if loading fails the hello is replaced by an
 * error frame and the process exits 1. After hello it answers set_target
 * and eval requests one at a time until a shutdown frame (exit 0) or EOF.
 */

import { FrameReader, Frame, encodeFrame, ProtocolError } from "./frames.js";
import { CropSpec, loadImageFile, parseCropSpec } from "./image.js";
import { ModelBundle, embedLatent, loadModels, preparePatch } from "./models.js";

export const PROTOCOL_VERSION = 1;

export interface ServeOptions {
  models: string;
  crop: string;
  device: string;
  input: NodeJS.ReadableStream;
  output: NodeJS.WritableStream;
}

function send(output: NodeJS.WritableStream, message: Frame): void {
  output.write(encodeFrame(message));
}

function sendError(output: NodeJS.WritableStream, message: string): void {
  send(output, { type: "error", message });
}

function asLatent(value: unknown, index: number, dim: number): Float64Array {
  if (!Array.isArray(value) || value.length !== dim) {
    throw new Error(`latent at index ${index} must be an array of ${dim} numbers`);
  }
  const out = new Float64Array(dim);
  for (let j = 0; j < dim; j++) {
    const v = value[j];
    if (typeof v !== "number" || !Number.isFinite(v)) {
      throw new Error(`latent at index ${index} has a non-finite entry at position ${j}`);
    }
    out[j] = v;
  }
  return out;
}

function handleSetTarget(models: ModelBundle, fixedCrop: CropSpec | null, frame: Frame): Frame {
  const path = frame.image_path;
  if (typeof path !== "string" || path.length === 0) {
    throw new Error("set_target needs a non-empty image_path");
  }
  const image = loadImageFile(path);
  const embedding = models.embed(preparePatch(models, image, fixedCrop));
  return { type: "target_ok", embedding: Array.from(embedding) };
}

function handleEval(models: ModelBundle, fixedCrop: CropSpec | null, frame: Frame): Frame {
  const id = frame.id;
  if (!Number.isInteger(id)) throw new Error("eval frame needs an integer id");
  const latents = frame.latents;
  if (!Array.isArray(latents) || latents.length === 0) {
    throw new Error("eval frame needs a non-empty latents array");
  }
  const embeddings = latents.map((raw, i) =>
    Array.from(embedLatent(models, asLatent(raw, i, models.latentDim), fixedCrop))
  );
  return { type: "embeddings", id: id as number, embeddings };
}

/** Run the request loop; resolves with the process exit code. */
export function serve(options: ServeOptions): Promise<number> {
  const { input, output } = options;

  let models: ModelBundle;
  let fixedCrop: CropSpec | null = null;
  try {
    models = loadModels(options.models);
    if (options.crop !== "auto") {
      fixedCrop = parseCropSpec(options.crop, models.detectSize, models.detectSize);
    }
  } catch (e) {
    sendError(output, e instanceof Error ? e.message : String(e));
    return Promise.resolve(1);
  }

  send(output, {
    type: "hello",
    protocol_version: PROTOCOL_VERSION,
    latent_dim: models.latentDim,
    embedding_dim: models.embeddingDim,
    embeddings_normalized: models.embeddingsNormalized,
  });

  return new Promise((resolve) => {
    const reader = new FrameReader();
    let done = false;

    const finish = (code: number) => {
      if (!done) {
        done = true;
        // Stop holding the event loop open on stdin once we're finished.
        const closable = input as { destroy?: () => void };
        if (typeof closable.destroy === "function") closable.destroy();
        resolve(code);
      }
    };

    input.on("data", (chunk: Buffer) => {
      let frames: Frame[];
      try {
        frames = reader.push(chunk);
      } catch (e) {
        // Unparseable stream: report and bail out, the engine is gone.
        sendError(output, e instanceof ProtocolError ? e.message : String(e));
        finish(1);
        return;
      }
      for (const frame of frames) {
        if (done) return;
        try {
          if (frame.type === "shutdown") {
            finish(0);
            return;
          } else if (frame.type === "set_target") {
            send(output, handleSetTarget(models, fixedCrop, frame));
          } else if (frame.type === "eval") {
            send(output, handleEval(models, fixedCrop, frame));
          } else {
            sendError(output, `unknown request type ${JSON.stringify(frame.type)}`);
          }
        } catch (e) {
          sendError(output, e instanceof Error ? e.message : String(e));
        }
      }
    });

    input.on("end", () => finish(0));
    input.on("error", () => finish(1));
  });
}
