import { CropSpec, bilinearResize, validateCropSpec } from "./image.js";
import { ModelBundle } from "./models.js";
import { Prng, deriveSeed } from "./prng.js";

export interface CoordinateDispersion {
  median: number;
  iqr: number;
}

export interface CalibrationReport {
  samples: number;
  failures: number;
  crop: CropSpec;
  dispersion: {
    left: CoordinateDispersion;
    top: CoordinateDispersion;
    right: CoordinateDispersion;
    bottom: CoordinateDispersion;
  };
}

function quantile(sorted: number[], q: number): number {
  const pos = (sorted.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
}

function dispersion(values: number[]): CoordinateDispersion {
  const sorted = [...values].sort((a, b) => a - b);
  return {
    median: quantile(sorted, 0.5),
    iqr: quantile(sorted, 0.75) - quantile(sorted, 0.25),
  };
}

/**
 * Detect faces on N generated samples and reduce the boxes to a fixed
 * median crop. Replaces per-image detection during fitness evaluation.
 */
export function calibrateCrop(models: ModelBundle, samples: number, seed: number): CalibrationReport {
  if (!Number.isInteger(samples) || samples < 1) {
    throw new Error(`--samples must be a positive integer, got ${samples}`);
  }
  const rng = new Prng(deriveSeed(seed, "calibration"));
  const latent = new Float64Array(models.latentDim);
  const boxes: CropSpec[] = [];
  let failures = 0;
  for (let i = 0; i < samples; i++) {
    rng.fillNormal(latent);
    const frame = bilinearResize(models.generate(latent), models.detectSize, models.detectSize);
    try {
      boxes.push(models.detect(frame));
    } catch {
      failures++;
    }
  }
  if (failures > 0.01 * samples) {
    throw new Error(
      `calibration failed: ${failures}/${samples} samples had no detectable face (over the 1% budget)`
    );
  }
  if (boxes.length === 0) throw new Error("calibration failed: no successful detections");

  const report = {
    left: dispersion(boxes.map((b) => b.left)),
    top: dispersion(boxes.map((b) => b.top)),
    right: dispersion(boxes.map((b) => b.right)),
    bottom: dispersion(boxes.map((b) => b.bottom)),
  };
  const crop = {
    left: Math.round(report.left.median),
    top: Math.round(report.top.median),
    right: Math.round(report.right.median),
    bottom: Math.round(report.bottom.median),
  };
  validateCropSpec(crop, models.detectSize, models.detectSize);
  return { samples, failures, crop, dispersion: report };
}
