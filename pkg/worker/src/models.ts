import { readFileSync } from "node:fs";
import { join } from "node:path";

import { GrayImage, CropSpec, bilinearResize, crop, makeImage, validateCropSpec } from "./image.js";
import { Prng, deriveSeed } from "./prng.js";

/**
 * A loaded generator/embedder/detector triple plus its geometry. The eval
 * pipeline is: generate (nativeSize) -> downscale (detectSize) -> crop ->
 * resize (inputSize) -> embed.
 */
export interface ModelBundle {
  kind: string;
  latentDim: number;
  embeddingDim: number;
  nativeSize: number;
  detectSize: number;
  inputSize: number;
  embeddingsNormalized: boolean;
  generate(latent: Float64Array): GrayImage;
  embed(image: GrayImage): Float64Array;
  detect(image: GrayImage): CropSpec;
}

export interface StubOptions {
  seed?: number;
  latentDim?: number;
  embeddingDim?: number;
  nativeSize?: number;
  detectSize?: number;
  inputSize?: number;
}

/**
 * Small random-weight stand-ins for the real generator and embedder so the
 * protocol and pipeline can be exercised without GPU or licensed weights.
 * Weights are a pure function of the seed.
 */
export function buildStubModels(options: StubOptions = {}): ModelBundle {
  const seed = options.seed ?? 0;
  const latentDim = options.latentDim ?? 512;
  const embeddingDim = options.embeddingDim ?? 128;
  const nativeSize = options.nativeSize ?? 64;
  const detectSize = options.detectSize ?? 32;
  const inputSize = options.inputSize ?? 16;

  const pixels = nativeSize * nativeSize;
  const genWeights = new Prng(deriveSeed(seed, "generator")).fillNormal(
    new Float64Array(pixels * latentDim)
  );
  const genBias = new Prng(deriveSeed(seed, "generator-bias")).fillNormal(new Float64Array(pixels));
  const flat = inputSize * inputSize;
  const embWeights = new Prng(deriveSeed(seed, "embedder")).fillNormal(
    new Float64Array(embeddingDim * flat)
  );

  const genScale = 1 / Math.sqrt(latentDim);

  function generate(latent: Float64Array): GrayImage {
    if (latent.length !== latentDim) {
      throw new Error(`latent has length ${latent.length}, generator expects ${latentDim}`);
    }
    const image = makeImage(nativeSize, nativeSize);
    for (let p = 0; p < pixels; p++) {
      let acc = 0;
      const row = p * latentDim;
      for (let j = 0; j < latentDim; j++) acc += genWeights[row + j] * latent[j];
      image.data[p] = 0.5 * (Math.tanh(acc * genScale + 0.5 * genBias[p]) + 1);
    }
    return image;
  }

  function embed(image: GrayImage): Float64Array {
    if (image.width !== inputSize || image.height !== inputSize) {
      throw new Error(
        `embedder expects ${inputSize}x${inputSize} input, got ${image.width}x${image.height}`
      );
    }
    const out = new Float64Array(embeddingDim);
    const scale = 1 / Math.sqrt(flat);
    for (let r = 0; r < embeddingDim; r++) {
      let acc = 0;
      const row = r * flat;
      for (let j = 0; j < flat; j++) acc += embWeights[row + j] * image.data[j];
      out[r] = acc * scale;
    }
    let norm = 0;
    for (let r = 0; r < embeddingDim; r++) norm += out[r] * out[r];
    norm = Math.sqrt(norm);
    if (norm > 0) {
      for (let r = 0; r < embeddingDim; r++) out[r] /= norm;
    }
    return out;
  }

  // Intensity-moment "face detector": a box around the bright mass of the
  // frame. Deterministic, and on stub images it lands near the center with
  // a small spread, which is what calibration needs to exercise.
  function detect(image: GrayImage): CropSpec {
    let total = 0;
    let sx = 0;
    let sy = 0;
    for (let y = 0; y < image.height; y++) {
      for (let x = 0; x < image.width; x++) {
        const w = image.data[y * image.width + x] ** 2;
        total += w;
        sx += w * x;
        sy += w * y;
      }
    }
    if (total <= 0) throw new Error("no face found: empty frame");
    const cx = sx / total;
    const cy = sy / total;
    let vx = 0;
    let vy = 0;
    for (let y = 0; y < image.height; y++) {
      for (let x = 0; x < image.width; x++) {
        const w = image.data[y * image.width + x] ** 2;
        vx += w * (x - cx) ** 2;
        vy += w * (y - cy) ** 2;
      }
    }
    const rx = 1.2 * Math.sqrt(vx / total);
    const ry = 1.2 * Math.sqrt(vy / total);
    const box = {
      left: Math.max(0, Math.floor(cx - rx)),
      top: Math.max(0, Math.floor(cy - ry)),
      right: Math.min(image.width, Math.ceil(cx + rx) + 1),
      bottom: Math.min(image.height, Math.ceil(cy + ry) + 1),
    };
    if (box.right - box.left < 2 || box.bottom - box.top < 2) {
      throw new Error("no face found: degenerate bounding box");
    }
    validateCropSpec(box, image.width, image.height);
    return box;
  }

  return {
    kind: "stub",
    latentDim,
    embeddingDim,
    nativeSize,
    detectSize,
    inputSize,
    embeddingsNormalized: true,
    generate,
    embed,
    detect,
  };
}

/**
 * Resolve a --models flag. "stub" (optionally "stub:SEED") builds the
 * in-memory stand-ins; anything else is a directory whose manifest.json
 * describes the weights to load.
 */
export function loadModels(spec: string): ModelBundle {
  if (spec === "stub") return buildStubModels();
  if (spec.startsWith("stub:")) {
    const seed = Number(spec.slice(5));
    if (!Number.isInteger(seed)) throw new Error(`bad stub seed in ${JSON.stringify(spec)}`);
    return buildStubModels({ seed });
  }
  let manifest: Record<string, unknown>;
  try {
    manifest = JSON.parse(readFileSync(join(spec, "manifest.json"), "utf-8"));
  } catch (e) {
    throw new Error(`cannot load models from ${spec}: ${e instanceof Error ? e.message : e}`);
  }
  if (manifest.kind !== "stub") {
    // Real generator/embedder hosting needs a GPU runtime this worker does
    // not ship with; the manifest format leaves room for it.
    throw new Error(`cannot load models from ${spec}: unsupported kind ${JSON.stringify(manifest.kind)}`);
  }
  return buildStubModels(manifest as StubOptions);
}

/** Downscale + crop + resize; the output always matches the embedder input. */
export function preparePatch(models: ModelBundle, frame: GrayImage, box: CropSpec | null): GrayImage {
  const detectFrame = bilinearResize(frame, models.detectSize, models.detectSize);
  const region = box ?? models.detect(detectFrame);
  return bilinearResize(crop(detectFrame, region), models.inputSize, models.inputSize);
}

/** Full fitness-path evaluation of one latent vector. */
export function embedLatent(models: ModelBundle, latent: Float64Array, box: CropSpec | null): Float64Array {
  return models.embed(preparePatch(models, models.generate(latent), box));
}
