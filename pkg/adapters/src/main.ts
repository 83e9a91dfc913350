#!/usr/bin/env node
/** CLI entry: partgrasp-adapter --config adapter.json */

import { parseArgs } from "node:util";

import { loadConfig } from "./config.js";
import { serveAdapter } from "./server.js";

async function main(): Promise<void> {
  const { values } = parseArgs({
    options: { config: { type: "string" } },
    strict: true,
  });
  if (!values.config) {
    throw new Error("usage: partgrasp-adapter --config <adapter.json>");
  }
  const config = loadConfig(values.config);
  const handle = await serveAdapter(config);
  process.stdout.write(JSON.stringify({ listening: handle.baseUrl, stage: config.stage }) + "\n");
  const shutdown = () => { void handle.close().then(() => process.exit(0)); };
  process.on("SIGINT", shutdown);
  process.on("SIGTERM", shutdown);
}

main().catch((e) => {
  process.stderr.write(`error: ${e instanceof Error ? e.message : e}\n`);
  process.exit(1);
});
