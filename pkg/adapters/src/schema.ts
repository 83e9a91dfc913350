/**
 * Wire schema for the stage services, mirrored from the published protocol:
 * UTF-8 JSON bodies, images as base64 PNGs (8-bit RGB color, 16-bit unsigned
 * millimeter depth, 0/255 gray masks), and the error envelope
 * {"error": {"code", "message"}} on non-2xx responses.
 */

import { z } from "zod";

export const DetectRequest = z.object({
  image_png_b64: z.string(),
  prompt: z.string(),
  threshold: z.number().default(0.3),
});
export type DetectRequest = z.infer<typeof DetectRequest>;

export const DetectResponse = z.object({
  // [x_min, y_min, x_max, y_max], half-open pixel box
  bbox: z.array(z.number().int()).length(4),
  score: z.number(),
});
export type DetectResponse = z.infer<typeof DetectResponse>;

export const SegmentRequest = z.object({
  image_png_b64: z.string(),
  part_prompt: z.string(),
});
export type SegmentRequest = z.infer<typeof SegmentRequest>;

export const SegmentResponse = z.object({
  mask_png_b64: z.string(),
  score: z.number(),
});
export type SegmentResponse = z.infer<typeof SegmentResponse>;

export const IntrinsicsBody = z.object({
  fx: z.number(),
  fy: z.number(),
  cx: z.number(),
  cy: z.number(),
});
export type IntrinsicsBody = z.infer<typeof IntrinsicsBody>;

export const GraspRequestBody = z.object({
  depth_png_b64: z.string(),
  intrinsics: IntrinsicsBody,
  mask_png_b64: z.string(),
});
export type GraspRequestBody = z.infer<typeof GraspRequestBody>;

export const PoseBody = z.object({
  q: z.array(z.number()).length(4), // (w, x, y, z)
  t: z.array(z.number()).length(3),
});

export const GraspBody = z.object({
  pose: PoseBody,
  width: z.number(),
  score: z.number(),
  contacts: z.array(z.array(z.number()).length(3)).length(2),
});
export type GraspBody = z.infer<typeof GraspBody>;

export const GraspResponse = z.object({
  grasps: z.array(GraspBody),
});
export type GraspResponse = z.infer<typeof GraspResponse>;

export const ErrorCode = z.enum(["not_found", "bad_request", "internal", "timeout"]);
export type ErrorCode = z.infer<typeof ErrorCode>;

export const ErrorEnvelope = z.object({
  error: z.object({ code: ErrorCode, message: z.string() }),
});
export type ErrorEnvelope = z.infer<typeof ErrorEnvelope>;

export const HealthResponse = z.object({
  status: z.string(),
  stage: z.string(),
  backend: z.string(),
  ready: z.boolean(),
});
export type HealthResponse = z.infer<typeof HealthResponse>;
