#!/usr/bin/env node
/**
 * plots — render an SVG figure from harness output files.
 *
 * Usage:
 *   plots --spec <figure-spec.json> [--out <dir>]
 *
 * The spec file names the figure, its input files (paths resolved relative
 * to the spec file itself), and optional label/title overrides.  The SVG is
 * written into --out (default: current directory) under the spec's output
 * name.  Exit code 0 on success, 1 on any usage/schema/render error.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import path from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { loadSpec, renderFigure } from "./figures.js";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        spec: { type: "string" },
        out: { type: "string", default: "." },
        help: { type: "boolean", default: false },
      },
      allowPositionals: false,
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  if (parsed.values.help) {
    console.log("usage: plots --spec <figure-spec.json> [--out <dir>]");
    return 0;
  }
  const specPath = parsed.values.spec;
  if (!specPath) {
    console.error("error: --spec <figure-spec.json> is required");
    return 1;
  }
  const outDir = parsed.values.out as string;
  try {
    const spec = loadSpec(specPath);
    const rendered = renderFigure(spec, path.dirname(specPath));
    mkdirSync(outDir, { recursive: true });
    const outPath = path.join(outDir, rendered.outputName);
    writeFileSync(outPath, rendered.svg);
    console.log(`SVG → ${outPath}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

// Run only when invoked as a script, not when imported by tests.
if (
  process.argv[1] &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exit(main(process.argv.slice(2)));
}
