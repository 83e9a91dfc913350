/**
 * Base64 PNG payload handling for the wire schema. Invalid base64 or
 * undecodable PNG bytes raise BadPayloadError, which the server maps to a
 * 400 bad_request envelope.
 */

import { decodeGray, decodeRgb, encodeGray8, GrayImage, PngError, RgbImage } from "./png.js";

export class BadPayloadError extends Error {}

function decodeBase64Strict(b64: string): Buffer {
  // Buffer.from(..., "base64") silently ignores junk; require a clean round trip.
  const stripped = b64.replace(/\s+/g, "");
  const raw = Buffer.from(stripped, "base64");
  if (raw.toString("base64").replace(/=+$/, "") !== stripped.replace(/=+$/, "")) {
    throw new BadPayloadError("malformed base64 payload");
  }
  return raw;
}

function decodePng<T>(b64: string, decode: (png: Buffer) => T): T {
  const raw = decodeBase64Strict(b64);
  try {
    return decode(raw);
  } catch (e) {
    if (e instanceof PngError) throw new BadPayloadError(`bad PNG payload: ${e.message}`);
    throw e;
  }
}

export function decodeRgbPayload(b64: string): RgbImage {
  return decodePng(b64, decodeRgb);
}

/** Depth travels as 16-bit unsigned millimeters; returns meters, 0 = invalid. */
export function decodeDepthPayload(b64: string): { width: number; height: number; meters: Float64Array } {
  const gray = decodePng(b64, decodeGray);
  const meters = new Float64Array(gray.samples.length);
  for (let i = 0; i < meters.length; i++) meters[i] = gray.samples[i] / 1000.0;
  return { width: gray.width, height: gray.height, meters };
}

export function decodeMaskPayload(b64: string): { width: number; height: number; bits: Uint8Array } {
  const gray: GrayImage = decodePng(b64, decodeGray);
  const bits = new Uint8Array(gray.samples.length);
  for (let i = 0; i < bits.length; i++) bits[i] = gray.samples[i] !== 0 ? 1 : 0;
  return { width: gray.width, height: gray.height, bits };
}

export function encodeMaskPayload(width: number, height: number, bits: Uint8Array): string {
  const samples = new Uint8Array(bits.length);
  for (let i = 0; i < bits.length; i++) samples[i] = bits[i] ? 255 : 0;
  return encodeGray8(width, height, samples).toString("base64");
}
