/**
 * Versioned readers for the harness output files.
 *
 * The simulation side writes three machine-readable artifacts that this
 * package consumes: `trials.csv` (per-round rows for every sample path),
 * `summary.json` (per-run aggregate), and `sweep.json` (one summary per
 * swept parameter value).  Each carries a schema tag; anything that does
 * not match is rejected up front rather than silently misread.
 */

// ---------------------------------------------------------------------------
// Schema tags (must match the writer side byte for byte)
// ---------------------------------------------------------------------------

export const TRIALS_SCHEMA = "feelsim-trials-v1";
export const SUMMARY_SCHEMA = "feelsim-summary-v1";
export const SWEEP_SCHEMA = "feelsim-sweep-v1";

export const TRIALS_HEADER =
  "trial_id,seed,round,active_count,effective,loss," +
  "grad_norm_sq,cum_latency_s,interference_power";

/** Raised whenever an input file fails the version or shape checks. */
export class SchemaError extends Error {}

// ---------------------------------------------------------------------------
// trials.csv
// ---------------------------------------------------------------------------

export interface TrialRow {
  trial_id: number;
  seed: number;
  round: number;
  active_count: number;
  effective: number;
  loss: number;
  grad_norm_sq: number;
  cum_latency_s: number;
  interference_power: number; // NaN on digital runs (column written as "nan")
}

export function parseTrialsCsv(text: string, source: string): TrialRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty file`);
  }
  const tag = lines[0] ?? "";
  if (!tag.startsWith("#") || tag.replace(/^#\s*/, "") !== TRIALS_SCHEMA) {
    throw new SchemaError(
      `${source}: expected schema "# ${TRIALS_SCHEMA}", got "${tag}"`
    );
  }
  if (lines[1] !== TRIALS_HEADER) {
    throw new SchemaError(
      `${source}: header mismatch for ${TRIALS_SCHEMA}: "${lines[1] ?? ""}"`
    );
  }
  const rows: TrialRow[] = [];
  for (let i = 2; i < lines.length; i++) {
    const parts = (lines[i] as string).split(",");
    if (parts.length !== 9) {
      throw new SchemaError(
        `${source}:${i + 1}: expected 9 fields, got ${parts.length}`
      );
    }
    const num = (j: number) => parseFloat(parts[j] as string);
    const row: TrialRow = {
      trial_id: num(0),
      seed: num(1),
      round: num(2),
      active_count: num(3),
      effective: num(4),
      loss: num(5),
      grad_norm_sq: num(6),
      cum_latency_s: num(7),
      interference_power: num(8), // "nan" parses to NaN, which is intended
    };
    if (!Number.isInteger(row.trial_id) || !Number.isInteger(row.round)) {
      throw new SchemaError(`${source}:${i + 1}: malformed row "${lines[i]}"`);
    }
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new SchemaError(`${source}: no trial rows (header only)`);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// summary.json
// ---------------------------------------------------------------------------

export interface RunSummary {
  schema: string;
  scheme: string;
  mobility: string;
  task: string;
  n_paths: number;
  n_rounds: number;
  loss_mean_per_round: number[];
  loss_se_per_round: number[];
  accuracy_mean_per_round: number[] | null;
  accuracy_se_per_round: number[] | null;
  mean_cumulative_latency: number;
  cumulative_latency_se: number;
  final_loss_mean: number;
  seeds: number[];
  [key: string]: unknown;
}

export function parseSummaryJson(text: string, source: string): RunSummary {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new SchemaError(`${source}: not valid JSON (${(err as Error).message})`);
  }
  return checkSummary(obj, source);
}

function checkSummary(obj: unknown, source: string): RunSummary {
  if (typeof obj !== "object" || obj === null) {
    throw new SchemaError(`${source}: expected a JSON object`);
  }
  const summary = obj as RunSummary;
  if (summary.schema !== SUMMARY_SCHEMA) {
    throw new SchemaError(
      `${source}: expected schema "${SUMMARY_SCHEMA}", got "${summary.schema}"`
    );
  }
  if (!Array.isArray(summary.loss_mean_per_round)) {
    throw new SchemaError(`${source}: missing loss_mean_per_round array`);
  }
  return summary;
}

// ---------------------------------------------------------------------------
// sweep.json
// ---------------------------------------------------------------------------

export interface SweepPoint {
  parameter: string;
  value: number;
  summary: RunSummary;
}

export interface SweepFile {
  schema: string;
  parameter: string;
  values: number[];
  points: SweepPoint[];
}

export function parseSweepJson(text: string, source: string): SweepFile {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch (err) {
    throw new SchemaError(`${source}: not valid JSON (${(err as Error).message})`);
  }
  if (typeof obj !== "object" || obj === null) {
    throw new SchemaError(`${source}: expected a JSON object`);
  }
  const sweep = obj as SweepFile;
  if (sweep.schema !== SWEEP_SCHEMA) {
    throw new SchemaError(
      `${source}: expected schema "${SWEEP_SCHEMA}", got "${sweep.schema}"`
    );
  }
  if (!Array.isArray(sweep.points) || sweep.points.length === 0) {
    throw new SchemaError(`${source}: sweep has no points`);
  }
  for (const point of sweep.points) {
    checkSummary(point.summary, `${source} (point ${point.parameter}=${point.value})`);
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Plain mean / standard error across sample paths.  This is the only
// statistic computed on this side of the file boundary; everything else
// arrives precomputed from the simulation package.
// ---------------------------------------------------------------------------

export function meanSe(values: number[]): { mean: number; se: number } {
  const n = values.length;
  if (n === 0) return { mean: NaN, se: NaN };
  const mean = values.reduce((a, b) => a + b, 0) / n;
  if (n === 1) return { mean, se: 0 };
  const varSum = values.reduce((a, b) => a + (b - mean) * (b - mean), 0);
  return { mean, se: Math.sqrt(varSum / (n - 1)) / Math.sqrt(n) };
}

/**
 * Group trial rows by round and reduce one column to mean ± SE across
 * sample paths.  Rounds are returned sorted ascending.
 */
export function perRoundStats(
  rows: TrialRow[],
  column: keyof TrialRow
): { round: number[]; mean: number[]; se: number[] } {
  const byRound = new Map<number, number[]>();
  for (const row of rows) {
    let bucket = byRound.get(row.round);
    if (!bucket) {
      bucket = [];
      byRound.set(row.round, bucket);
    }
    bucket.push(row[column]);
  }
  const rounds = [...byRound.keys()].sort((a, b) => a - b);
  const mean: number[] = [];
  const se: number[] = [];
  for (const r of rounds) {
    const stats = meanSe(byRound.get(r) as number[]);
    mean.push(stats.mean);
    se.push(stats.se);
  }
  return { round: rounds, mean, se };
}
