/**
 * Minimal PNG codec for the image payloads the wire schema uses: 8-bit RGB
 * color, 8-bit grayscale masks, and 16-bit grayscale millimeter depth.
 *
 * Hand-rolled on node:zlib because the schema needs 16-bit grayscale
 * round-tripped exactly; popular decoders rescale 16-bit samples to 8 bits.
 * Supports non-interlaced color types 0 (gray, 8/16 bit) and 2 (RGB, 8 bit)
 * with all five scanline filters, which covers every payload the protocol
 * produces.
 */

import * as zlib from "node:zlib";

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

export class PngError extends Error {}

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major samples, one per pixel (0..255 or 0..65535). */
  samples: Uint16Array;
  bitDepth: 8 | 16;
}

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major interleaved r,g,b bytes. */
  pixels: Uint8Array;
}

interface RawImage {
  width: number;
  height: number;
  bitDepth: number;
  colorType: number;
  /** Unfiltered scanline bytes, channels interleaved. */
  bytes: Buffer;
}

function crc32(buf: Buffer): number {
  let crc = 0xffffffff;
  for (const byte of buf) {
    crc ^= byte;
    for (let k = 0; k < 8; k++) {
      crc = crc & 1 ? (crc >>> 1) ^ 0xedb88320 : crc >>> 1;
    }
  }
  return (crc ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Buffer): Buffer {
  const head = Buffer.concat([Buffer.from(type, "latin1"), data]);
  const out = Buffer.alloc(head.length + 8);
  out.writeUInt32BE(data.length, 0);
  head.copy(out, 4);
  out.writeUInt32BE(crc32(head), head.length + 4);
  return out;
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  return pb <= pc ? b : c;
}

function decodeRaw(png: Buffer): RawImage {
  if (png.length < 8 || !png.subarray(0, 8).equals(SIGNATURE)) {
    throw new PngError("not a PNG: bad signature");
  }
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  let colorType = 0;
  const idat: Buffer[] = [];
  let offset = 8;
  while (offset + 8 <= png.length) {
    const length = png.readUInt32BE(offset);
    const type = png.toString("latin1", offset + 4, offset + 8);
    const data = png.subarray(offset + 8, offset + 8 + length);
    if (data.length < length) throw new PngError("truncated chunk");
    if (type === "IHDR") {
      width = data.readUInt32BE(0);
      height = data.readUInt32BE(4);
      bitDepth = data[8];
      colorType = data[9];
      if (data[12] !== 0) throw new PngError("interlaced PNG not supported");
      if (!((colorType === 0 && (bitDepth === 8 || bitDepth === 16)) ||
            (colorType === 2 && bitDepth === 8))) {
        throw new PngError(`unsupported PNG format: color type ${colorType}, depth ${bitDepth}`);
      }
    } else if (type === "IDAT") {
      idat.push(data);
    } else if (type === "IEND") {
      break;
    }
    offset += 12 + length;
  }
  if (!width || !height) throw new PngError("missing IHDR");
  if (idat.length === 0) throw new PngError("missing IDAT");

  let raw: Buffer;
  try {
    raw = zlib.inflateSync(Buffer.concat(idat));
  } catch (e) {
    throw new PngError(`bad IDAT stream: ${e instanceof Error ? e.message : e}`);
  }
  const channels = colorType === 2 ? 3 : 1;
  const bpp = channels * (bitDepth / 8); // filter unit, bytes per pixel
  const stride = width * bpp;
  if (raw.length < height * (stride + 1)) throw new PngError("truncated pixel data");

  const bytes = Buffer.alloc(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const row = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    const out = bytes.subarray(y * stride, (y + 1) * stride);
    const prev = y > 0 ? bytes.subarray((y - 1) * stride, y * stride) : null;
    for (let x = 0; x < stride; x++) {
      const a = x >= bpp ? out[x - bpp] : 0;
      const b = prev ? prev[x] : 0;
      const c = prev && x >= bpp ? prev[x - bpp] : 0;
      let value = row[x];
      switch (filter) {
        case 0: break;
        case 1: value += a; break;
        case 2: value += b; break;
        case 3: value += (a + b) >> 1; break;
        case 4: value += paeth(a, b, c); break;
        default: throw new PngError(`unknown scanline filter ${filter}`);
      }
      out[x] = value & 0xff;
    }
  }
  return { width, height, bitDepth, colorType, bytes };
}

/** Decode a grayscale PNG (8 or 16 bit); RGB input is reduced to its red channel. */
export function decodeGray(png: Buffer): GrayImage {
  const raw = decodeRaw(png);
  const samples = new Uint16Array(raw.width * raw.height);
  if (raw.colorType === 2) {
    for (let i = 0; i < samples.length; i++) samples[i] = raw.bytes[i * 3];
    return { width: raw.width, height: raw.height, samples, bitDepth: 8 };
  }
  if (raw.bitDepth === 16) {
    for (let i = 0; i < samples.length; i++) samples[i] = raw.bytes.readUInt16BE(i * 2);
  } else {
    for (let i = 0; i < samples.length; i++) samples[i] = raw.bytes[i];
  }
  return { width: raw.width, height: raw.height, samples, bitDepth: raw.bitDepth as 8 | 16 };
}

/** Decode a PNG to interleaved 8-bit RGB; grayscale input is replicated. */
export function decodeRgb(png: Buffer): RgbImage {
  const raw = decodeRaw(png);
  const pixels = new Uint8Array(raw.width * raw.height * 3);
  if (raw.colorType === 2) {
    pixels.set(raw.bytes);
  } else if (raw.bitDepth === 8) {
    for (let i = 0; i < raw.width * raw.height; i++) {
      pixels[i * 3] = pixels[i * 3 + 1] = pixels[i * 3 + 2] = raw.bytes[i];
    }
  } else {
    for (let i = 0; i < raw.width * raw.height; i++) {
      const v = raw.bytes.readUInt16BE(i * 2) >> 8;
      pixels[i * 3] = pixels[i * 3 + 1] = pixels[i * 3 + 2] = v;
    }
  }
  return { width: raw.width, height: raw.height, pixels };
}

function encode(width: number, height: number, bitDepth: number,
                colorType: number, bytes: Buffer): Buffer {
  const channels = colorType === 2 ? 3 : 1;
  const stride = width * channels * (bitDepth / 8);
  const filtered = Buffer.alloc(height * (stride + 1));
  for (let y = 0; y < height; y++) {
    filtered[y * (stride + 1)] = 0; // filter: None
    bytes.copy(filtered, y * (stride + 1) + 1, y * stride, (y + 1) * stride);
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = bitDepth;
  ihdr[9] = colorType;
  return Buffer.concat([
    SIGNATURE,
    chunk("IHDR", ihdr),
    chunk("IDAT", zlib.deflateSync(filtered)),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

export function encodeGray8(width: number, height: number, samples: Uint8Array): Buffer {
  return encode(width, height, 8, 0, Buffer.from(samples));
}

export function encodeGray16(width: number, height: number, samples: Uint16Array): Buffer {
  const bytes = Buffer.alloc(samples.length * 2);
  for (let i = 0; i < samples.length; i++) bytes.writeUInt16BE(samples[i], i * 2);
  return encode(width, height, 16, 0, bytes);
}

export function encodeRgb(width: number, height: number, pixels: Uint8Array): Buffer {
  return encode(width, height, 8, 2, Buffer.from(pixels));
}
