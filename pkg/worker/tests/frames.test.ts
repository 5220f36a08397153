import { describe, expect, it } from "vitest";

import { FrameReader, decodePayload, encodeFrame } from "../src/frames.js";

describe("frame codec", () => {
  it("round-trips a message", () => {
    const message = { type: "eval", id: 7, latents: [[0.5, -1.5]] };
    const encoded = encodeFrame(message);
    expect(encoded.readUInt32BE(0)).toBe(encoded.length - 4);
    expect(decodePayload(encoded.subarray(4))).toEqual(message);
  });

  it("produces canonical bytes: sorted keys, no whitespace", () => {
    const encoded = encodeFrame({
      type: "hello",
      protocol_version: 1,
      latent_dim: 4,
      embedding_dim: 3,
    });
    const golden = '{"embedding_dim":3,"latent_dim":4,"protocol_version":1,"type":"hello"}';
    expect(encoded.subarray(4).toString("utf-8")).toBe(golden);
  });

  it("re-encoding a decoded frame reproduces the bytes", () => {
    const encoded = encodeFrame({ type: "embeddings", id: 2, embeddings: [[0.125, 0.25]] });
    expect(encodeFrame(decodePayload(encoded.subarray(4)))).toEqual(encoded);
  });

  it("rejects non-finite numbers and missing type", () => {
    expect(() => encodeFrame({ type: "x", value: Infinity })).toThrow(/non-finite/);
    expect(() => encodeFrame({} as never)).toThrow(/"type"/);
    expect(() => decodePayload(Buffer.from("[1,2]"))).toThrow(/object/);
    expect(() => decodePayload(Buffer.from("{nope"))).toThrow(/valid JSON/);
  });

  it("reassembles frames from arbitrary chunk boundaries", () => {
    const a = encodeFrame({ type: "one", n: 1 });
    const b = encodeFrame({ type: "two", n: 2 });
    const stream = Buffer.concat([a, b]);
    const reader = new FrameReader();
    const seen: string[] = [];
    for (let i = 0; i < stream.length; i++) {
      for (const frame of reader.push(stream.subarray(i, i + 1))) {
        seen.push(frame.type);
      }
    }
    expect(seen).toEqual(["one", "two"]);
    expect(reader.pending()).toBe(0);
  });

  it("returns several frames from one chunk", () => {
    const reader = new FrameReader();
    const chunk = Buffer.concat([
      encodeFrame({ type: "a" }),
      encodeFrame({ type: "b" }),
      encodeFrame({ type: "c" }),
    ]);
    expect(reader.push(chunk).map((f) => f.type)).toEqual(["a", "b", "c"]);
  });

  it("rejects oversized frame announcements", () => {
    const reader = new FrameReader();
    const header = Buffer.alloc(4);
    header.writeUInt32BE(0xffffffff, 0);
    expect(() => reader.push(header)).toThrow(/exceeds/);
  });
});
