// Readers for the files a run directory contains: the manifest plus
// the series CSVs and diagnostics JSON. Everything here parses what
// the simulator wrote; nothing recomputes physics.

import fs from "node:fs";
import path from "node:path";

export interface Check {
  name: string;
  passed: boolean;
  statistic: number;
  tolerance: number;
}

export interface HolderFit {
  exponent: number;
  intercept: number;
  lags: number[];
  mean_increments: number[];
}

export interface Manifest {
  pipeline: string;
  master_seed: number;
  code_version: string;
  config_sha256: string;
  seed_scheme: string;
  wall_clock_seconds: number;
  outputs: string[];
  config: Record<string, unknown>;
  checks?: Check[];
  n_levels?: number;
  under_resolved?: boolean;
  holder?: HolderFit;
  critical_lebesgue_order?: number;
  threshold_classification?: Record<string, string>;
  source_run?: string;
}

export interface HurstReport {
  nominal_hurst: number;
  variogram_hurst: number;
  hurst_gap: number;
  trajectory_holder: HolderFit;
  threshold_band: [number, number] | null;
}

export interface Table {
  header: string[];
  columns: Map<string, number[]>;
  rows: number;
}

/** Raised when a directory cannot be treated as a run directory at all. */
export class RunDirError extends Error {}

export function readManifest(runDir: string): Manifest {
  const file = path.join(runDir, "manifest.json");
  if (!fs.existsSync(file)) {
    throw new RunDirError(`no manifest.json in ${runDir}`);
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(fs.readFileSync(file, "utf-8"));
  } catch (err) {
    throw new RunDirError(`unreadable manifest.json in ${runDir}: ${(err as Error).message}`);
  }
  const m = parsed as Manifest;
  if (typeof m.pipeline !== "string" || !Array.isArray(m.outputs)) {
    throw new RunDirError(`manifest.json in ${runDir} lacks pipeline/outputs fields`);
  }
  return m;
}

/** Parse one of the simulator's CSVs: a header line, then float rows. */
export function readCsv(file: string): Table {
  const text = fs.readFileSync(file, "utf-8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new Error(`${path.basename(file)} has a header but no rows`);
  }
  const header = lines[0]!.split(",");
  const columns = new Map<string, number[]>(header.map((h) => [h, []]));
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i]!.split(",");
    if (parts.length !== header.length) {
      throw new Error(`${path.basename(file)} row ${i} has ${parts.length} fields, expected ${header.length}`);
    }
    for (let j = 0; j < header.length; j++) {
      const v = Number(parts[j]);
      if (!Number.isFinite(v)) {
        throw new Error(`${path.basename(file)} row ${i} column ${header[j]} is not a finite number`);
      }
      columns.get(header[j]!)!.push(v);
    }
  }
  return { header, columns, rows: lines.length - 1 };
}

export function column(table: Table, name: string): number[] {
  const col = table.columns.get(name);
  if (col === undefined) {
    throw new Error(`missing column ${name}`);
  }
  return col;
}

export function readHurstReport(file: string): HurstReport {
  return JSON.parse(fs.readFileSync(file, "utf-8")) as HurstReport;
}
