/**
 * Stage backends. The "null" family is GPU-free and deterministic: it
 * answers from image arithmetic alone so the protocol surface can be
 * exercised without any model weights. Real model wrappers are optional
 * plug-ins loaded by module name through loadBackend.
 */

import {
  decodeDepthPayload, decodeMaskPayload, decodeRgbPayload, encodeMaskPayload,
} from "./codec.js";
import {
  DetectRequest, DetectResponse, GraspRequestBody, GraspResponse,
  SegmentRequest, SegmentResponse,
} from "./schema.js";

export class NoResultError extends Error {}

export interface StageBackend {
  readonly name: string;
  readonly stage: "detect" | "segment" | "grasp";
  handle(body: unknown): Promise<unknown>;
}

export interface BackendOptions {
  /** Gray-level cutoff for the null segmenter (pixels strictly above are mask). */
  maskThreshold?: number;
  /** Jaw opening reported by the null grasp backend, meters. */
  graspWidth?: number;
  /** Depth slack below the nearest masked point that still joins the contact patch, meters. */
  patchDepth?: number;
}

/** Null detector: the whole image is the detection, score 1.0. */
export class NullDetector implements StageBackend {
  readonly name = "null";
  readonly stage = "detect" as const;

  async handle(body: unknown): Promise<DetectResponse> {
    const req = DetectRequest.parse(body);
    const image = decodeRgbPayload(req.image_png_b64);
    return { bbox: [0, 0, image.width, image.height], score: 1.0 };
  }
}

/** Null segmenter: gray-intensity threshold over the image, score 1.0. */
export class NullSegmenter implements StageBackend {
  readonly name = "null";
  readonly stage = "segment" as const;

  constructor(private readonly threshold: number = 0) {}

  async handle(body: unknown): Promise<SegmentResponse> {
    const req = SegmentRequest.parse(body);
    const image = decodeRgbPayload(req.image_png_b64);
    const bits = new Uint8Array(image.width * image.height);
    for (let i = 0; i < bits.length; i++) {
      const base = i * 3;
      // ITU-R BT.601 luma, rounded
      const gray = Math.round(0.299 * image.pixels[base] + 0.587 * image.pixels[base + 1]
                              + 0.114 * image.pixels[base + 2]);
      bits[i] = gray > this.threshold ? 1 : 0;
    }
    return {
      mask_png_b64: encodeMaskPayload(image.width, image.height, bits),
      score: 1.0,
    };
  }
}

/**
 * Null grasp backend: a single top-down pinch at the highest masked surface
 * point. "Highest" is nearest-to-camera in the +z-forward camera frame; the
 * grasp centers on the centroid of the masked points within patchDepth of
 * that nearest depth, approaches along +z (identity rotation), and closes
 * along +x.
 */
export class NullGrasper implements StageBackend {
  readonly name = "null";
  readonly stage = "grasp" as const;

  constructor(private readonly width: number = 0.04,
              private readonly patchDepth: number = 0.005) {}

  async handle(body: unknown): Promise<GraspResponse> {
    const req = GraspRequestBody.parse(body);
    const depth = decodeDepthPayload(req.depth_png_b64);
    const mask = decodeMaskPayload(req.mask_png_b64);
    if (mask.width !== depth.width || mask.height !== depth.height) {
      throw new NoResultError("mask and depth dimensions disagree");
    }

    let nearest = Infinity;
    for (let i = 0; i < depth.meters.length; i++) {
      if (mask.bits[i] && depth.meters[i] > 0 && depth.meters[i] < nearest) {
        nearest = depth.meters[i];
      }
    }
    if (!isFinite(nearest)) {
      throw new NoResultError("no valid depth inside the mask");
    }

    const { fx, fy, cx, cy } = req.intrinsics;
    let sx = 0, sy = 0, sz = 0, n = 0;
    for (let v = 0; v < depth.height; v++) {
      for (let u = 0; u < depth.width; u++) {
        const i = v * depth.width + u;
        const z = depth.meters[i];
        if (!mask.bits[i] || z <= 0 || z > nearest + this.patchDepth) continue;
        sx += ((u - cx) / fx) * z;
        sy += ((v - cy) / fy) * z;
        sz += z;
        n += 1;
      }
    }
    const center: [number, number, number] = [sx / n, sy / n, sz / n];
    const half = this.width / 2;
    return {
      grasps: [{
        pose: { q: [1, 0, 0, 0], t: center },
        width: this.width,
        score: 1.0,
        contacts: [
          [center[0] - half, center[1], center[2]],
          [center[0] + half, center[1], center[2]],
        ],
      }],
    };
  }
}

export function buildNullBackend(stage: "detect" | "segment" | "grasp",
                                 options: BackendOptions = {}): StageBackend {
  switch (stage) {
    case "detect": return new NullDetector();
    case "segment": return new NullSegmenter(options.maskThreshold ?? 0);
    case "grasp": return new NullGrasper(options.graspWidth ?? 0.04,
                                         options.patchDepth ?? 0.005);
  }
}

/**
 * Resolve a backend by name: "null" builds in-process; any other name is
 * treated as a module specifier exporting createBackend(stage, options).
 */
export async function loadBackend(name: string, stage: "detect" | "segment" | "grasp",
                                  options: BackendOptions = {}): Promise<StageBackend> {
  if (name === "null") return buildNullBackend(stage, options);
  const plugin = await import(name);
  if (typeof plugin.createBackend !== "function") {
    throw new Error(`backend module ${name} does not export createBackend`);
  }
  return plugin.createBackend(stage, options);
}
