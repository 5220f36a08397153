import { readFileSync } from "node:fs";

/** Grayscale image, row-major, intensities in [0, 1]. */
export interface GrayImage {
  width: number;
  height: number;
  data: Float64Array;
}

export interface CropSpec {
  left: number;
  top: number;
  right: number;
  bottom: number;
}

export function makeImage(width: number, height: number): GrayImage {
  return { width, height, data: new Float64Array(width * height) };
}

export function validateCropSpec(crop: CropSpec, width: number, height: number): void {
  const { left, top, right, bottom } = crop;
  for (const v of [left, top, right, bottom]) {
    if (!Number.isInteger(v)) throw new Error(`crop coordinates must be integers, got ${JSON.stringify(crop)}`);
  }
  if (!(0 <= left && left < right && right <= width)) {
    throw new Error(`crop violates 0 <= left < right <= ${width}: ${JSON.stringify(crop)}`);
  }
  if (!(0 <= top && top < bottom && bottom <= height)) {
    throw new Error(`crop violates 0 <= top < bottom <= ${height}: ${JSON.stringify(crop)}`);
  }
}

export function parseCropSpec(text: string, width: number, height: number): CropSpec {
  const parts = text.split(",").map((p) => Number(p.trim()));
  if (parts.length !== 4 || parts.some((p) => !Number.isFinite(p))) {
    throw new Error(`crop spec must be "left,top,right,bottom", got ${JSON.stringify(text)}`);
  }
  const crop = { left: parts[0], top: parts[1], right: parts[2], bottom: parts[3] };
  validateCropSpec(crop, width, height);
  return crop;
}

export function crop(image: GrayImage, spec: CropSpec): GrayImage {
  validateCropSpec(spec, image.width, image.height);
  const w = spec.right - spec.left;
  const h = spec.bottom - spec.top;
  const out = makeImage(w, h);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      out.data[y * w + x] = image.data[(y + spec.top) * image.width + (x + spec.left)];
    }
  }
  return out;
}

/**
 * Bilinear resampling with pixel-center alignment. Identity when the
 * target size equals the source size.
 */
export function bilinearResize(image: GrayImage, width: number, height: number): GrayImage {
  if (width < 1 || height < 1) throw new Error(`bad resize target ${width}x${height}`);
  if (width === image.width && height === image.height) {
    return { width, height, data: image.data.slice() };
  }
  const out = makeImage(width, height);
  const sx = image.width / width;
  const sy = image.height / height;
  for (let y = 0; y < height; y++) {
    const fy = Math.min(Math.max((y + 0.5) * sy - 0.5, 0), image.height - 1);
    const y0 = Math.floor(fy);
    const y1 = Math.min(y0 + 1, image.height - 1);
    const wy = fy - y0;
    for (let x = 0; x < width; x++) {
      const fx = Math.min(Math.max((x + 0.5) * sx - 0.5, 0), image.width - 1);
      const x0 = Math.floor(fx);
      const x1 = Math.min(x0 + 1, image.width - 1);
      const wx = fx - x0;
      const top = image.data[y0 * image.width + x0] * (1 - wx) + image.data[y0 * image.width + x1] * wx;
      const bottom = image.data[y1 * image.width + x0] * (1 - wx) + image.data[y1 * image.width + x1] * wx;
      out.data[y * width + x] = top * (1 - wy) + bottom * wy;
    }
  }
  return out;
}

function loadJsonImage(path: string): GrayImage {
  const parsed = JSON.parse(readFileSync(path, "utf-8"));
  const { width, height, pixels } = parsed;
  if (!Number.isInteger(width) || !Number.isInteger(height) || !Array.isArray(pixels)) {
    throw new Error(`${path}: JSON image needs integer width/height and a pixels array`);
  }
  if (pixels.length !== width * height) {
    throw new Error(`${path}: expected ${width * height} pixels, found ${pixels.length}`);
  }
  return { width, height, data: Float64Array.from(pixels) };
}

function loadPgmImage(path: string): GrayImage {
  const raw = readFileSync(path);
  // P5 header: magic, width, height, maxval, single whitespace, then raster
  let pos = 0;
  const token = (): string => {
    while (pos < raw.length && /\s/.test(String.fromCharCode(raw[pos]))) pos++;
    if (raw[pos] === 0x23) { // '#' comment
      while (pos < raw.length && raw[pos] !== 0x0a) pos++;
      return token();
    }
    const start = pos;
    while (pos < raw.length && !/\s/.test(String.fromCharCode(raw[pos]))) pos++;
    return raw.subarray(start, pos).toString("ascii");
  };
  if (token() !== "P5") throw new Error(`${path}: only binary PGM (P5) is supported`);
  const width = Number(token());
  const height = Number(token());
  const maxval = Number(token());
  pos++; // single whitespace after maxval
  if (!(width > 0 && height > 0 && maxval > 0 && maxval < 65536)) {
    throw new Error(`${path}: malformed PGM header`);
  }
  const out = makeImage(width, height);
  const wide = maxval > 255;
  for (let i = 0; i < width * height; i++) {
    const v = wide ? raw.readUInt16BE(pos + 2 * i) : raw[pos + i];
    out.data[i] = v / maxval;
  }
  return out;
}

/** Reference images arrive as tiny JSON rasters or binary PGM files. */
export function loadImageFile(path: string): GrayImage {
  if (path.endsWith(".json")) return loadJsonImage(path);
  if (path.endsWith(".pgm")) return loadPgmImage(path);
  throw new Error(`${path}: unsupported image format (use .json or .pgm)`);
}
