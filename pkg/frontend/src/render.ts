// Turn a run directory into SVG figures plus an HTML summary. Figures
// are built fully in memory first; nothing is written unless at least
// one renders, so a directory with no readable inputs leaves no
// half-finished report behind.

import fs from "node:fs";
import path from "node:path";

import { lineChart, holderFitChart, type Series } from "./figures.js";
import {
  column,
  readCsv,
  readHurstReport,
  readManifest,
  RunDirError,
  type Check,
  type HurstReport,
  type Manifest,
  type Table,
} from "./runfile.js";
import { renderSummary } from "./summary.js";

export class NoInputsError extends Error {}

export interface FigureOutcome {
  name: string;
  title: string;
  source: string;
  status: "rendered" | "skipped";
  reason?: string;
  svg?: string;
}

export interface CheckRow extends Check {
  origin: string;
}

export interface ThresholdRow {
  q: number;
  sups: number[];
  increments: number[];
  growing: boolean;
}

export interface RenderReport {
  runDir: string;
  outDir: string;
  summaryFile: string;
  rendered: string[];
  skipped: { name: string; reason: string }[];
}

interface SourceFile {
  file: string;
  label: string;
  listed: boolean;
  exists: boolean;
}

function locate(dir: string, manifest: Manifest | null, name: string, label: string): SourceFile {
  const file = path.join(dir, name);
  return {
    file,
    label,
    listed: manifest !== null && manifest.outputs.includes(name),
    exists: fs.existsSync(file),
  };
}

function attempt(
  outcomes: FigureOutcome[],
  name: string,
  title: string,
  source: SourceFile,
  build: () => string,
): void {
  if (!source.exists) {
    if (source.listed) {
      outcomes.push({
        name,
        title,
        source: source.label,
        status: "skipped",
        reason: `${source.label} is listed in the manifest but missing`,
      });
    }
    return;
  }
  try {
    outcomes.push({ name, title, source: source.label, status: "rendered", svg: build() });
  } catch (err) {
    outcomes.push({
      name,
      title,
      source: source.label,
      status: "skipped",
      reason: (err as Error).message,
    });
  }
}

function normsFigure(table: Table): string {
  const t = column(table, "time");
  const series: Series[] = [];
  if (table.columns.has("convolution_l2")) {
    series.push({ label: "boundary convolution", x: t, y: column(table, "convolution_l2") });
    series.push({ label: "remainder", x: t, y: column(table, "remainder_l2") });
    series.push({ label: "assembled field", x: t, y: column(table, "total_l2") });
    series.push({ label: "assembled gradient", x: t, y: column(table, "total_grad") });
  } else {
    series.push({ label: "L2 norm", x: t, y: column(table, "l2") });
    series.push({ label: "critical Lp norm", x: t, y: column(table, "lp_crit") });
    series.push({ label: "gradient", x: t, y: column(table, "grad") });
  }
  return lineChart({ title: "Norm trajectories", xLabel: "time", yLabel: "norm", series });
}

function levelNormsFigure(table: Table): string {
  const t = column(table, "time");
  const series: Series[] = table.header
    .filter((h) => h.startsWith("level"))
    .map((h) => ({ label: h.replace("_l2", ""), x: t, y: column(table, h) }));
  return lineChart({
    title: "Splitting level norms",
    xLabel: "time",
    yLabel: "L2 norm",
    series,
  });
}

function energyFigure(table: Table): string {
  return lineChart({
    title: "Energy balance residual",
    xLabel: "time",
    yLabel: "residual",
    series: [{ label: "residual", x: column(table, "time"), y: column(table, "residual") }],
  });
}

function telescopingFigure(table: Table): string {
  return lineChart({
    title: "Telescoping defect of the splitting",
    xLabel: "time",
    yLabel: "defect",
    series: [
      {
        label: "defect",
        x: column(table, "time"),
        y: column(table, "residual"),
        markers: true,
      },
    ],
  });
}

function blowupFigure(table: Table): string {
  return lineChart({
    title: "Wall-normal blow-up profile",
    xLabel: "z",
    yLabel: "running sup of critical Lp norm",
    series: [{ label: "profile", x: column(table, "z"), y: column(table, "sup_lp_crit") }],
  });
}

function noiseFigure(table: Table): string {
  const t = column(table, "time");
  const series: Series[] = [{ label: "mode 0", x: t, y: column(table, "mode0") }];
  for (let k = 1; k <= 4; k++) {
    const name = `mode${k}_re`;
    if (!table.columns.has(name)) break;
    series.push({ label: `Re mode ${k}`, x: t, y: column(table, name) });
  }
  return lineChart({
    title: "Boundary noise sample paths",
    xLabel: "time",
    yLabel: "path value",
    series,
  });
}

function decayFigure(table: Table): string {
  const t = column(table, "time");
  return lineChart({
    title: "Spectral decay rates by window",
    xLabel: "time",
    yLabel: "fitted decay rate",
    series: [
      { label: "interior window", x: t, y: column(table, "interior_rate") },
      { label: "near-wall window", x: t, y: column(table, "near_wall_rate") },
    ],
  });
}

function parseThresholdTable(table: Table): ThresholdRow[] {
  const qs = column(table, "q");
  const supNames = table.header.filter((h) => /^sup\d+$/.test(h));
  const incNames = table.header.filter((h) => /^increment\d+$/.test(h));
  const growing = column(table, "growing");
  return qs.map((q, i) => ({
    q,
    sups: supNames.map((h) => column(table, h)[i]!),
    increments: incNames.map((h) => column(table, h)[i]!),
    growing: growing[i] === 1.0,
  }));
}

function thresholdFigure(rows: ThresholdRow[]): string {
  const series: Series[] = rows.map((row) => ({
    label: `q = ${row.q} (${row.growing ? "growing" : "stabilizing"})`,
    x: row.sups.map((_, i) => i),
    y: row.sups,
    markers: true,
    dashed: !row.growing,
  }));
  return lineChart({
    title: "Threshold experiment: norm sup per ladder rung",
    xLabel: "ladder rung",
    yLabel: "replica-averaged sup",
    series,
  });
}

export function renderRun(runDir: string, outDir: string): RenderReport {
  const manifest = readManifest(runDir);

  // a diagnostics directory can be rendered on its own; for run
  // directories, pick up the diagnostics subdirectory when present
  const diagDir = manifest.pipeline === "diagnostics" ? runDir : path.join(runDir, "diagnostics");
  let diagManifest: Manifest | null = null;
  if (manifest.pipeline === "diagnostics") {
    diagManifest = manifest;
  } else if (fs.existsSync(path.join(diagDir, "manifest.json"))) {
    diagManifest = readManifest(diagDir);
  }

  const outcomes: FigureOutcome[] = [];
  const runFile = (name: string) => locate(runDir, manifest, name, name);
  const diagFile = (name: string) =>
    locate(diagDir, diagManifest, name, manifest.pipeline === "diagnostics" ? name : `diagnostics/${name}`);

  attempt(outcomes, "norms", "Norm trajectories", runFile("norms.csv"), () =>
    normsFigure(readCsv(runFile("norms.csv").file)),
  );
  attempt(outcomes, "level-norms", "Splitting level norms", runFile("level_norms.csv"), () =>
    levelNormsFigure(readCsv(runFile("level_norms.csv").file)),
  );
  attempt(outcomes, "energy-residual", "Energy balance residual", runFile("energy_residual.csv"), () =>
    energyFigure(readCsv(runFile("energy_residual.csv").file)),
  );
  attempt(outcomes, "telescoping", "Telescoping defect", runFile("telescoping.csv"), () =>
    telescopingFigure(readCsv(runFile("telescoping.csv").file)),
  );
  attempt(outcomes, "blowup-profile", "Wall-normal blow-up profile", runFile("blowup_profile.csv"), () =>
    blowupFigure(readCsv(runFile("blowup_profile.csv").file)),
  );
  attempt(outcomes, "noise-paths", "Boundary noise sample paths", runFile("noise.csv"), () =>
    noiseFigure(readCsv(runFile("noise.csv").file)),
  );
  attempt(outcomes, "interior-decay", "Spectral decay rates", diagFile("interior_decay.csv"), () =>
    decayFigure(readCsv(diagFile("interior_decay.csv").file)),
  );

  let thresholdRows: ThresholdRow[] | null = null;
  attempt(outcomes, "threshold-sups", "Threshold experiment", diagFile("threshold_table.csv"), () => {
    thresholdRows = parseThresholdTable(readCsv(diagFile("threshold_table.csv").file));
    return thresholdFigure(thresholdRows);
  });

  let hurstReport: HurstReport | null = null;
  const hurstFile = diagFile("hurst_report.json");
  if (hurstFile.exists) {
    try {
      hurstReport = readHurstReport(hurstFile.file);
    } catch {
      hurstReport = null;
    }
  }
  if (manifest.holder !== undefined) {
    const holder = manifest.holder;
    attempt(
      outcomes,
      "holder-fit",
      "Time regularity fit",
      { file: "", label: "manifest holder entry", listed: true, exists: true },
      () =>
        holderFitChart(
          "Time regularity of the boundary convolution",
          holder.lags,
          holder.mean_increments,
          holder.exponent,
          holder.intercept,
        ),
    );
  } else if (hurstFile.exists || hurstFile.listed) {
    attempt(outcomes, "holder-fit", "Time regularity fit", hurstFile, () => {
      const report = readHurstReport(hurstFile.file);
      const fit = report.trajectory_holder;
      return holderFitChart(
        "Time regularity of the loaded trajectory",
        fit.lags,
        fit.mean_increments,
        fit.exponent,
        fit.intercept,
      );
    });
  }

  const rendered = outcomes.filter((o) => o.status === "rendered");
  const skipped = outcomes
    .filter((o) => o.status === "skipped")
    .map((o) => ({ name: o.name, reason: o.reason ?? "" }));
  if (rendered.length === 0) {
    const why = skipped.length
      ? ` (${skipped.map((s) => `${s.name}: ${s.reason}`).join("; ")})`
      : "";
    throw new NoInputsError(`no renderable inputs in ${runDir}${why}`);
  }

  const checks: CheckRow[] = [];
  for (const c of manifest.checks ?? []) {
    checks.push({ ...c, origin: manifest.pipeline });
  }
  if (diagManifest !== null && diagManifest !== manifest) {
    for (const c of diagManifest.checks ?? []) {
      checks.push({ ...c, origin: "diagnostics" });
    }
  }

  const html = renderSummary({
    runName: path.basename(path.resolve(runDir)),
    manifest,
    diagManifest: diagManifest === manifest ? null : diagManifest,
    outcomes,
    checks,
    thresholdRows,
    hurstReport,
  });

  fs.mkdirSync(path.join(outDir, "figures"), { recursive: true });
  for (const o of rendered) {
    fs.writeFileSync(path.join(outDir, "figures", `${o.name}.svg`), o.svg!);
  }
  const summaryFile = path.join(outDir, "summary.html");
  fs.writeFileSync(summaryFile, html);

  return {
    runDir,
    outDir,
    summaryFile,
    rendered: rendered.map((o) => o.name),
    skipped,
  };
}

export { RunDirError };
