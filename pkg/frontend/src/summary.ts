// HTML summary page. Self-contained (inline CSS, relative figure
// links) and free of timestamps so repeated renders of the same run
// produce identical bytes.

import { fmt } from "./figures.js";
import type { HurstReport, Manifest } from "./runfile.js";
import type { CheckRow, FigureOutcome, ThresholdRow } from "./render.js";

export interface SummaryInput {
  runName: string;
  manifest: Manifest;
  diagManifest: Manifest | null;
  outcomes: FigureOutcome[];
  checks: CheckRow[];
  thresholdRows: ThresholdRow[] | null;
  hurstReport: HurstReport | null;
}

export function escapeHtml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function metaRow(key: string, value: string): string {
  return `<tr><th>${escapeHtml(key)}</th><td>${escapeHtml(value)}</td></tr>`;
}

function metadataTable(m: Manifest): string {
  const rows: string[] = [
    metaRow("pipeline", m.pipeline),
    metaRow("master seed", String(m.master_seed)),
    metaRow("code version", m.code_version),
    metaRow("config sha256", m.config_sha256),
    metaRow("seed scheme", m.seed_scheme),
    metaRow("wall clock", `${fmt(m.wall_clock_seconds)} s`),
  ];
  if (m.n_levels !== undefined) rows.push(metaRow("splitting levels", String(m.n_levels)));
  if (m.critical_lebesgue_order !== undefined) {
    rows.push(metaRow("critical Lebesgue order", fmt(m.critical_lebesgue_order)));
  }
  if (m.under_resolved !== undefined) {
    rows.push(metaRow("under-resolved", m.under_resolved ? "yes" : "no"));
  }
  return `<table class="meta">${rows.join("")}</table>`;
}

function checksSection(checks: CheckRow[]): string {
  if (checks.length === 0) {
    return `<p class="muted">No checks were recorded in this run.</p>`;
  }
  const rows = checks
    .map((c) => {
      const cls = c.passed ? "pass" : "fail";
      const verdict = c.passed ? "PASS" : "FAIL";
      return (
        `<tr><td>${escapeHtml(c.name)}</td><td>${escapeHtml(c.origin)}</td>` +
        `<td class="num">${fmt(c.statistic)}</td><td class="num">${fmt(c.tolerance)}</td>` +
        `<td class="${cls}">${verdict}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="grid"><thead><tr><th>check</th><th>recorded by</th>` +
    `<th>statistic</th><th>tolerance</th><th>result</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

function figuresSection(outcomes: FigureOutcome[]): string {
  const parts: string[] = [];
  for (const o of outcomes) {
    if (o.status !== "rendered") continue;
    parts.push(
      `<figure><img src="figures/${o.name}.svg" alt="${escapeHtml(o.title)}">` +
        `<figcaption>${escapeHtml(o.title)} <span class="muted">(${escapeHtml(o.source)})</span></figcaption></figure>`,
    );
  }
  const skipped = outcomes.filter((o) => o.status === "skipped");
  if (skipped.length > 0) {
    const items = skipped
      .map((o) => `<li><strong>${escapeHtml(o.name)}</strong>: ${escapeHtml(o.reason ?? "")}</li>`)
      .join("");
    parts.push(`<h3>Skipped figures</h3><ul class="skips">${items}</ul>`);
  }
  return parts.join("\n");
}

function thresholdSection(rows: ThresholdRow[], report: HurstReport | null): string {
  const nSups = rows[0]?.sups.length ?? 0;
  const nIncs = rows[0]?.increments.length ?? 0;
  const head =
    "<tr><th>q</th>" +
    Array.from({ length: nSups }, (_, i) => `<th>sup, rung ${i}</th>`).join("") +
    Array.from({ length: nIncs }, (_, i) => `<th>increment ${i}</th>`).join("") +
    "<th>classification</th></tr>";
  const body = rows
    .map((r) => {
      const cls = r.growing ? "grow" : "stab";
      const label = r.growing ? "growing" : "stabilizing";
      return (
        `<tr><td class="num">${fmt(r.q)}</td>` +
        r.sups.map((v) => `<td class="num">${fmt(v)}</td>`).join("") +
        r.increments.map((v) => `<td class="num">${fmt(v)}</td>`).join("") +
        `<td class="${cls}">${label}</td></tr>`
      );
    })
    .join("");
  let band = "";
  if (report !== null) {
    band =
      report.threshold_band !== null
        ? `<p>Critical band bracketed by the experiment: [${fmt(report.threshold_band[0])}, ${fmt(report.threshold_band[1])}].</p>`
        : `<p>The experiment did not bracket a critical band; every exponent fell on one side.</p>`;
  }
  return (
    `<table class="grid"><thead>${head}</thead><tbody>${body}</tbody></table>` + band
  );
}

function hurstSection(report: HurstReport): string {
  const rows = [
    metaRow("nominal Hurst exponent", fmt(report.nominal_hurst)),
    metaRow("variogram estimate", fmt(report.variogram_hurst)),
    metaRow("gap", fmt(report.hurst_gap)),
    metaRow("trajectory time regularity", fmt(report.trajectory_holder.exponent)),
  ];
  return `<table class="meta">${rows.join("")}</table>`;
}

const CSS = `
:root {
  --ink: #1f2430;
  --muted: #6b7280;
  --line: #d7dbe2;
  --accent: #2563eb;
  --pass: #047857;
  --fail: #b91c1c;
  --bg: #ffffff;
  --panel: #f6f7f9;
}
body {
  margin: 0 auto;
  padding: 2rem 1.5rem 4rem;
  max-width: 60rem;
  font-family: Georgia, "Times New Roman", serif;
  color: var(--ink);
  background: var(--bg);
  line-height: 1.5;
}
h1 { font-size: 1.6rem; margin-bottom: 0.2rem; }
h2 { font-size: 1.2rem; margin-top: 2.2rem; border-bottom: 1px solid var(--line); padding-bottom: 0.3rem; }
h3 { font-size: 1rem; margin-top: 1.6rem; }
.sub { color: var(--muted); margin-top: 0; }
table { border-collapse: collapse; margin: 0.8rem 0; }
table.meta th { text-align: left; padding: 0.2rem 1rem 0.2rem 0; font-weight: normal; color: var(--muted); white-space: nowrap; }
table.meta td { padding: 0.2rem 0; font-family: ui-monospace, monospace; font-size: 0.9rem; }
table.grid { width: 100%; font-size: 0.9rem; }
table.grid th, table.grid td { border: 1px solid var(--line); padding: 0.3rem 0.55rem; text-align: left; }
table.grid thead { background: var(--panel); }
td.num { font-family: ui-monospace, monospace; text-align: right; }
td.pass { color: var(--pass); font-weight: bold; }
td.fail { color: var(--fail); font-weight: bold; }
td.grow { color: var(--fail); }
td.stab { color: var(--pass); }
figure { margin: 1.2rem 0; }
figure img { max-width: 100%; border: 1px solid var(--line); }
figcaption { font-size: 0.85rem; color: var(--muted); margin-top: 0.3rem; }
ul.skips li { margin: 0.2rem 0; }
.muted { color: var(--muted); }
details { margin: 0.8rem 0; }
details pre { background: var(--panel); padding: 0.8rem; overflow-x: auto; font-size: 0.8rem; }
footer { margin-top: 3rem; color: var(--muted); font-size: 0.85rem; border-top: 1px solid var(--line); padding-top: 0.6rem; }
`;

export function renderSummary(input: SummaryInput): string {
  const { manifest } = input;
  const sections: string[] = [];

  sections.push(`<h1>Run report: ${escapeHtml(input.runName)}</h1>`);
  sections.push(
    `<p class="sub">${escapeHtml(manifest.pipeline)} pipeline, seed ${manifest.master_seed}</p>`,
  );

  sections.push("<h2>Run metadata</h2>");
  sections.push(metadataTable(manifest));
  sections.push(
    `<details><summary>configuration</summary><pre>${escapeHtml(
      JSON.stringify(manifest.config, null, 2),
    )}</pre></details>`,
  );

  sections.push("<h2>Recorded checks</h2>");
  sections.push(checksSection(input.checks));

  sections.push("<h2>Figures</h2>");
  sections.push(figuresSection(input.outcomes));

  if (input.thresholdRows !== null && input.thresholdRows.length > 0) {
    sections.push("<h2>Threshold experiment</h2>");
    sections.push(thresholdSection(input.thresholdRows, input.hurstReport));
  }

  if (input.hurstReport !== null) {
    sections.push("<h2>Boundary regularity recovery</h2>");
    sections.push(hurstSection(input.hurstReport));
  }

  if (input.diagManifest !== null && input.diagManifest.source_run !== undefined) {
    sections.push(
      `<p class="muted">Diagnostics were computed from ${escapeHtml(input.diagManifest.source_run)}.</p>`,
    );
  }

  sections.push(`<footer>rendered by fracchannel-report</footer>`);

  return `<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>Run report: ${escapeHtml(input.runName)}</title>
<style>${CSS}</style>
</head>
<body>
${sections.join("\n")}
</body>
</html>
`;
}
