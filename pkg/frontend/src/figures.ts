/**
 * Figure catalogue: maps a FigureSpec to an SVG string.
 *
 * Two families:
 *  - round-series figures (fig3, fig6a, fig6b): per-round mean loss with
 *    +/- 1 SE whiskers across sample paths, one curve per trials.csv input;
 *  - parameter figures (fig4a, fig4b, fig4c, fig5): total latency against
 *    the swept network parameter, one curve per sweep.json input, using the
 *    mean/SE the simulation side already wrote.
 */

import { readFileSync } from "node:fs";
import path from "node:path";
import {
  SchemaError,
  SweepFile,
  parseSweepJson,
  parseTrialsCsv,
  perRoundStats,
} from "./schema.js";
import { Curve, renderChart } from "./svg.js";

// ---------------------------------------------------------------------------
// FigureSpec
// ---------------------------------------------------------------------------

export const FIGURE_IDS = [
  "fig3",
  "fig4a",
  "fig4b",
  "fig4c",
  "fig5",
  "fig6a",
  "fig6b",
] as const;

export type FigureId = (typeof FIGURE_IDS)[number];

export interface FigureInput {
  path: string;
  label?: string;
}

export interface FigureSpec {
  figure: FigureId;
  inputs: FigureInput[];
  title?: string;
  x_label?: string;
  y_label?: string;
  output?: string; // defaults to "<figure>.svg"
}

interface FigureDef {
  kind: "rounds" | "sweep";
  minInputs: number;
  sweepParameter?: string; // required swept parameter for "sweep" figures
  title: string;
  xLabel: string;
  yLabel: string;
}

const CATALOGUE: Record<FigureId, FigureDef> = {
  fig3: {
    kind: "rounds",
    minInputs: 2,
    title: "Training loss vs rounds by mobility",
    xLabel: "communication round",
    yLabel: "global loss",
  },
  fig4a: {
    kind: "sweep",
    minInputs: 1,
    sweepParameter: "lambda_d",
    title: "Learning latency vs device density",
    xLabel: "device density lambda_d (1/m^2)",
    yLabel: "total latency (ms)",
  },
  fig4b: {
    kind: "sweep",
    minInputs: 1,
    sweepParameter: "theta",
    title: "Learning latency vs SIR threshold",
    xLabel: "SIR decoding threshold theta",
    yLabel: "total latency (ms)",
  },
  fig4c: {
    kind: "sweep",
    minInputs: 1,
    sweepParameter: "M",
    title: "Learning latency vs subcarrier count",
    xLabel: "subcarriers M",
    yLabel: "total latency (ms)",
  },
  fig5: {
    kind: "sweep",
    minInputs: 2,
    sweepParameter: "lambda_d",
    title: "Digital vs analog latency across density",
    xLabel: "device density lambda_d (1/m^2)",
    yLabel: "total latency (ms)",
  },
  fig6a: {
    kind: "rounds",
    minInputs: 2,
    title: "Digital vs analog training loss (sparse network)",
    xLabel: "communication round",
    yLabel: "global loss",
  },
  fig6b: {
    kind: "rounds",
    minInputs: 2,
    title: "Digital vs analog training loss (dense network)",
    xLabel: "communication round",
    yLabel: "global loss",
  },
};

// ---------------------------------------------------------------------------
// Spec loading
// ---------------------------------------------------------------------------

export function loadSpec(specPath: string): FigureSpec {
  let obj: unknown;
  try {
    obj = JSON.parse(readFileSync(specPath, "utf-8"));
  } catch (err) {
    throw new SchemaError(`${specPath}: cannot read spec (${(err as Error).message})`);
  }
  if (typeof obj !== "object" || obj === null) {
    throw new SchemaError(`${specPath}: spec must be a JSON object`);
  }
  const spec = obj as FigureSpec;
  if (!FIGURE_IDS.includes(spec.figure)) {
    throw new SchemaError(
      `${specPath}: unknown figure "${spec.figure}" (choose from ${FIGURE_IDS.join(", ")})`
    );
  }
  const def = CATALOGUE[spec.figure];
  if (!Array.isArray(spec.inputs) || spec.inputs.length < def.minInputs) {
    throw new SchemaError(
      `${specPath}: ${spec.figure} needs at least ${def.minInputs} input file(s)`
    );
  }
  for (const input of spec.inputs) {
    if (typeof input.path !== "string" || input.path.length === 0) {
      throw new SchemaError(`${specPath}: every input needs a "path"`);
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

function readInput(baseDir: string, input: FigureInput): string {
  const resolved = path.isAbsolute(input.path)
    ? input.path
    : path.join(baseDir, input.path);
  try {
    return readFileSync(resolved, "utf-8");
  } catch (err) {
    throw new SchemaError(`${resolved}: cannot read input (${(err as Error).message})`);
  }
}

function roundsCurves(spec: FigureSpec, baseDir: string): Curve[] {
  return spec.inputs.map((input) => {
    const text = readInput(baseDir, input);
    const rows = parseTrialsCsv(text, input.path);
    const stats = perRoundStats(rows, "loss");
    return {
      label: input.label ?? path.basename(input.path, ".csv"),
      x: stats.round,
      y: stats.mean,
      se: stats.se,
    };
  });
}

function sweepCurves(spec: FigureSpec, baseDir: string, def: FigureDef): Curve[] {
  return spec.inputs.map((input) => {
    const text = readInput(baseDir, input);
    const sweep: SweepFile = parseSweepJson(text, input.path);
    if (sweep.parameter !== def.sweepParameter) {
      throw new SchemaError(
        `${input.path}: ${spec.figure} expects a sweep over ` +
          `"${def.sweepParameter}", got "${sweep.parameter}"`
      );
    }
    const points = [...sweep.points].sort((a, b) => a.value - b.value);
    const first = points[0];
    return {
      label: input.label ?? `${first?.summary.scheme ?? "run"}`,
      x: points.map((p) => p.value),
      // seconds -> milliseconds; mean/SE come straight from the summary
      y: points.map((p) => p.summary.mean_cumulative_latency * 1e3),
      se: points.map((p) => p.summary.cumulative_latency_se * 1e3),
    };
  });
}

export interface RenderedFigure {
  svg: string;
  outputName: string;
}

export function renderFigure(spec: FigureSpec, baseDir: string): RenderedFigure {
  const def = CATALOGUE[spec.figure];
  const curves =
    def.kind === "rounds"
      ? roundsCurves(spec, baseDir)
      : sweepCurves(spec, baseDir, def);
  const svg = renderChart({
    title: spec.title ?? def.title,
    subtitle: `${spec.figure} · ${curves.length} curve(s), error bars = ±1 SE across sample paths`,
    xLabel: spec.x_label ?? def.xLabel,
    yLabel: spec.y_label ?? def.yLabel,
    curves,
    yMin: def.kind === "sweep" ? 0 : undefined,
  });
  return { svg, outputName: spec.output ?? `${spec.figure}.svg` };
}
