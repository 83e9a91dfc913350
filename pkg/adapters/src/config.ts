/**
 * Adapter configuration: one JSON document naming exactly one backend for
 * exactly one stage, plus the listen address, queue depth, and opaque
 * backend-specific options passed through to the plug-in.
 */

import { readFileSync } from "node:fs";
import { z } from "zod";

export const AdapterConfig = z.object({
  stage: z.enum(["detect", "segment", "grasp"]),
  backend: z.string().default("null"),
  host: z.string().default("127.0.0.1"),
  port: z.number().int().min(0).max(65535).default(0),
  queue_depth: z.number().int().min(0).default(8),
  options: z.record(z.string(), z.unknown()).default({}),
});
export type AdapterConfig = z.infer<typeof AdapterConfig>;

export function loadConfig(path: string): AdapterConfig {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (e) {
    throw new Error(`cannot load adapter config ${path}: ${e instanceof Error ? e.message : e}`);
  }
  return AdapterConfig.parse(raw);
}
