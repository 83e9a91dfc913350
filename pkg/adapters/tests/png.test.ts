import { describe, expect, it } from "vitest";

import {
  decodeGray, decodeRgb, encodeGray16, encodeGray8, encodeRgb, PngError,
} from "../dist/png.js";
import { loadFixture } from "./fixtures.js";

describe("png round trips", () => {
  it("gray8 encode/decode is bit-exact", () => {
    const samples = new Uint8Array(6 * 4);
    for (let i = 0; i < samples.length; i++) samples[i] = (i * 37) % 256;
    const out = decodeGray(encodeGray8(6, 4, samples));
    expect(out.width).toBe(6);
    expect(out.height).toBe(4);
    expect(out.bitDepth).toBe(8);
    expect(Array.from(out.samples)).toEqual(Array.from(samples));
  });

  it("gray16 encode/decode is bit-exact", () => {
    const samples = new Uint16Array(5 * 3);
    for (let i = 0; i < samples.length; i++) samples[i] = (i * 4211 + 9) % 65536;
    samples[0] = 0;
    samples[1] = 65535;
    const out = decodeGray(encodeGray16(5, 3, samples));
    expect(out.bitDepth).toBe(16);
    expect(Array.from(out.samples)).toEqual(Array.from(samples));
  });

  it("rgb encode/decode is bit-exact", () => {
    const pixels = new Uint8Array(4 * 2 * 3);
    for (let i = 0; i < pixels.length; i++) pixels[i] = (i * 53) % 256;
    const out = decodeRgb(encodeRgb(4, 2, pixels));
    expect(out.width).toBe(4);
    expect(out.height).toBe(2);
    expect(Array.from(out.pixels)).toEqual(Array.from(pixels));
  });
});

describe("decoding payloads produced by the primary implementation", () => {
  it("reads the golden RGB image with consistent dimensions", () => {
    const png = Buffer.from(loadFixture("detect_request").image_png_b64, "base64");
    const rgb = decodeRgb(png);
    expect(rgb.width).toBeGreaterThan(0);
    expect(rgb.height).toBeGreaterThan(0);
    expect(rgb.pixels.length).toBe(rgb.width * rgb.height * 3);
  });

  it("reads the golden 16-bit depth image in millimeters", () => {
    const png = Buffer.from(loadFixture("grasp_request").depth_png_b64, "base64");
    const gray = decodeGray(png);
    expect(gray.bitDepth).toBe(16);
    // the golden scene sits roughly half a meter from the camera
    const valid = Array.from(gray.samples).filter((v) => v > 0);
    expect(valid.length).toBeGreaterThan(0);
    expect(Math.min(...valid)).toBeGreaterThan(100);
    expect(Math.max(...valid)).toBeLessThan(5000);
  });

  it("reads the golden mask as strictly binary", () => {
    const png = Buffer.from(loadFixture("segment_response").body.mask_png_b64, "base64");
    const gray = decodeGray(png);
    const values = new Set(gray.samples);
    expect([...values].every((v) => v === 0 || v === 255)).toBe(true);
    expect(values.has(255)).toBe(true);
  });
});

describe("malformed inputs", () => {
  it("rejects non-PNG bytes", () => {
    expect(() => decodeGray(Buffer.from("definitely not a png"))).toThrow(PngError);
  });

  it("rejects truncated pixel data", () => {
    const png = encodeGray8(8, 8, new Uint8Array(64));
    expect(() => decodeGray(png.subarray(0, png.length - 20))).toThrow(PngError);
  });
});
