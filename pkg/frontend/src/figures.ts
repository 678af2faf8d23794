// Hand-rolled SVG charts. Each builder returns a complete standalone
// <svg> document string; rendering is deterministic so re-runs produce
// identical bytes.

export interface Series {
  label: string;
  x: number[];
  y: number[];
  dashed?: boolean;
  markers?: boolean;
  scatterOnly?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
}

const WIDTH = 660;
const HEIGHT = 380;
const MARGIN = { top: 42, right: 18, bottom: 48, left: 72 };
const PALETTE = [
  "#2563eb", "#dc2626", "#059669", "#d97706",
  "#7c3aed", "#0891b2", "#be185d", "#4d7c0f",
];

/** Fixed-precision number rendering for ticks and labels. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const s = v.toExponential(2);
    // trim zero padding in the mantissa: 2.00e-15 -> 2e-15
    return s.replace(/\.?0+e/, "e");
  }
  const s = v.toPrecision(4);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

function escapeXml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

interface Scale {
  lo: number;
  hi: number;
  ticks: number[];
  map: (v: number) => number;
}

/** Round tick spacing to a 1/2/5 decade multiple. */
function niceStep(span: number, target: number): number {
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function makeScale(values: number[], pixLo: number, pixHi: number): Scale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!(hi > lo)) {
    // degenerate range: pad around the constant value
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const step = niceStep(hi - lo, 5);
  const tickLo = Math.ceil(lo / step - 1e-9) * step;
  const ticks: number[] = [];
  for (let t = tickLo; t <= hi + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  const map = (v: number) => pixLo + ((v - lo) / (hi - lo)) * (pixHi - pixLo);
  return { lo, hi, ticks, map };
}

function px(v: number): string {
  return v.toFixed(2).replace(/\.?0+$/, "") || "0";
}

export function lineChart(spec: ChartSpec): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const xs = spec.series.flatMap((s) => s.x);
  const ys = spec.series.flatMap((s) => s.y);
  const sx = makeScale(xs, MARGIN.left, MARGIN.left + plotW);
  const sy = makeScale(ys, MARGIN.top + plotH, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${MARGIN.left}" y="22" font-size="15" font-weight="bold" fill="#111">${escapeXml(spec.title)}</text>`,
  );

  for (const t of sy.ticks) {
    const y = px(sy.map(t));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#e5e7eb"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 6}" y="${y}" font-size="11" fill="#444" text-anchor="end" dominant-baseline="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of sx.ticks) {
    const x = px(sx.map(t));
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top + plotH}" x2="${x}" y2="${MARGIN.top + plotH + 4}" stroke="#444"/>`,
    );
    parts.push(
      `<text x="${x}" y="${MARGIN.top + plotH + 17}" font-size="11" fill="#444" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#9ca3af"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" font-size="12" fill="#111" text-anchor="middle">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" font-size="12" fill="#111" text-anchor="middle" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${escapeXml(spec.yLabel)}</text>`,
  );

  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    const pts = s.x.map((v, k) => `${px(sx.map(v))},${px(sy.map(s.y[k]!))}`);
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
    if (!s.scatterOnly && pts.length > 1) {
      parts.push(
        `<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="1.6"${dash}/>`,
      );
    }
    if (s.markers || pts.length === 1) {
      for (const p of pts) {
        const [cx, cy] = p.split(",");
        parts.push(`<circle cx="${cx}" cy="${cy}" r="2.8" fill="${color}"/>`);
      }
    }
  });

  // legend, one row per series, top right of the plot area
  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    const y = MARGIN.top + 10 + i * 16;
    const x = MARGIN.left + plotW - 170;
    const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
    parts.push(
      `<line x1="${x}" y1="${y}" x2="${x + 20}" y2="${y}" stroke="${color}" stroke-width="1.6"${dash}/>`,
    );
    parts.push(
      `<text x="${x + 26}" y="${y + 4}" font-size="11" fill="#111">${escapeXml(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/**
 * Log-log scatter of increment means against lag with the fitted power
 * law drawn through them. The fit parameters come from the run files;
 * nothing is re-estimated here.
 */
export function holderFitChart(
  title: string,
  lags: number[],
  means: number[],
  exponent: number,
  intercept: number,
): string {
  const lx = lags.map((v) => Math.log10(v));
  const ly = means.map((v) => Math.log10(v));
  // the run stores a natural-log regression: ln y = e ln x + c
  const fitY = lx.map((v) => (exponent * v * Math.LN10 + intercept) / Math.LN10);
  return lineChart({
    title,
    xLabel: "log10 lag",
    yLabel: "log10 mean increment",
    series: [
      { label: "measured", x: lx, y: ly, markers: true, scatterOnly: true },
      { label: `fit, slope ${fmt(exponent)}`, x: lx, y: fitY, dashed: true },
    ],
  });
}
