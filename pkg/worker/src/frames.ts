/**
 * Length-prefixed JSON framing for the engine <-> worker pipe.
 *
 * Every frame is a 4-byte big-endian unsigned payload length followed by
 * that many bytes of UTF-8 JSON. The JSON value is always an object with a
 * string "type" field. Frames are encoded canonically: object keys sorted,
 * no insignificant whitespace, so re-encoding a decoded frame reproduces
 * the original bytes (within one language's float formatting).
 */

export const MAX_FRAME_BYTES = 256 * 1024 * 1024;

export class ProtocolError extends Error {}

export type Frame = { type: string; [key: string]: unknown };

function canonicalize(value: unknown): string {
  if (value === null) return "null";
  switch (typeof value) {
    case "boolean":
      return value ? "true" : "false";
    case "number":
      if (!Number.isFinite(value)) {
        throw new ProtocolError(`cannot encode non-finite number ${value}`);
      }
      return JSON.stringify(value);
    case "string":
      return JSON.stringify(value);
    case "object":
      if (Array.isArray(value)) {
        return "[" + value.map(canonicalize).join(",") + "]";
      }
      const entries = Object.entries(value as Record<string, unknown>)
        .filter(([, v]) => v !== undefined)
        .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
      return "{" + entries.map(([k, v]) => JSON.stringify(k) + ":" + canonicalize(v)).join(",") + "}";
    default:
      throw new ProtocolError(`cannot encode value of type ${typeof value}`);
  }
}

export function encodeFrame(message: Frame): Buffer {
  if (typeof message !== "object" || message === null || typeof message.type !== "string") {
    throw new ProtocolError("frame message must be an object with a string \"type\"");
  }
  const payload = Buffer.from(canonicalize(message), "utf-8");
  if (payload.length > MAX_FRAME_BYTES) {
    throw new ProtocolError(`frame of ${payload.length} bytes exceeds the ${MAX_FRAME_BYTES} limit`);
  }
  const out = Buffer.alloc(4 + payload.length);
  out.writeUInt32BE(payload.length, 0);
  payload.copy(out, 4);
  return out;
}

export function decodePayload(payload: Buffer): Frame {
  let parsed: unknown;
  try {
    parsed = JSON.parse(payload.toString("utf-8"));
  } catch (e) {
    throw new ProtocolError(`frame payload is not valid JSON: ${e}`);
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new ProtocolError("frame payload must be a JSON object");
  }
  const frame = parsed as Record<string, unknown>;
  if (typeof frame.type !== "string") {
    throw new ProtocolError("frame payload is missing a string \"type\" field");
  }
  return frame as Frame;
}

/** Incremental parser: feed arbitrary chunks, get whole frames out. */
export class FrameReader {
  private buffered: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): Frame[] {
    this.buffered = this.buffered.length === 0 ? chunk : Buffer.concat([this.buffered, chunk]);
    const frames: Frame[] = [];
    for (;;) {
      if (this.buffered.length < 4) break;
      const size = this.buffered.readUInt32BE(0);
      if (size > MAX_FRAME_BYTES) {
        throw new ProtocolError(`incoming frame of ${size} bytes exceeds the ${MAX_FRAME_BYTES} limit`);
      }
      if (this.buffered.length < 4 + size) break;
      frames.push(decodePayload(this.buffered.subarray(4, 4 + size)));
      this.buffered = this.buffered.subarray(4 + size);
    }
    return frames;
  }

  /** Bytes still waiting for the rest of their frame. */
  pending(): number {
    return this.buffered.length;
  }
}
