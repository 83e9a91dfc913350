import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

/** Golden wire-protocol fixtures shipped at the repository root. */
export const FIXTURES_DIR = join(
  dirname(fileURLToPath(import.meta.url)), "..", "..", "fixtures", "protocol");

export function loadFixture(name: string): any {
  return JSON.parse(readFileSync(join(FIXTURES_DIR, `${name}.json`), "utf-8"));
}
