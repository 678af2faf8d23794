import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { afterEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli.js";
import { NoInputsError, renderRun, RunDirError } from "../src/render.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const GOLDEN_RUN = path.join(HERE, "..", "fixtures", "golden-run");
const GOLDEN_LINEAR = path.join(HERE, "..", "fixtures", "golden-linear");

const madeDirs: string[] = [];

function tmpDir(): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "fracchannel-report-"));
  madeDirs.push(dir);
  return dir;
}

afterEach(() => {
  vi.restoreAllMocks();
  while (madeDirs.length > 0) {
    fs.rmSync(madeDirs.pop()!, { recursive: true, force: true });
  }
});

describe("golden run directory", () => {
  it("renders the full figure set with no skips", () => {
    const out = tmpDir();
    const report = renderRun(GOLDEN_RUN, out);
    expect(report.skipped).toEqual([]);
    expect(report.rendered.sort()).toEqual([
      "energy-residual",
      "holder-fit",
      "interior-decay",
      "level-norms",
      "noise-paths",
      "norms",
      "telescoping",
      "threshold-sups",
    ]);
    for (const name of report.rendered) {
      const svg = fs.readFileSync(path.join(out, "figures", `${name}.svg`), "utf-8");
      expect(svg.startsWith("<svg")).toBe(true);
    }
  });

  it("writes a summary listing every recorded check as passed", () => {
    const out = tmpDir();
    renderRun(GOLDEN_RUN, out);
    const html = fs.readFileSync(path.join(out, "summary.html"), "utf-8");
    expect(html).toContain("split forcings telescope to the assembled field");
    expect(html).toContain("time grid resolves the sampled mode cutoff");
    expect(html).toContain("modal increments recover the boundary Hurst exponent");
    expect(html).toContain("growth classification is monotone in the Lebesgue order");
    expect(html).toContain("PASS");
    expect(html).not.toContain("FAIL");
    expect(html).toContain("Critical band bracketed");
    expect(html).toContain("stabilizing");
    expect(html).toContain("growing");
  });

  it("exits 0 through the CLI and prints the output directory", () => {
    const out = tmpDir();
    const log = vi.spyOn(console, "log").mockImplementation(() => {});
    expect(main([GOLDEN_RUN, "--out", out])).toBe(0);
    expect(log).toHaveBeenCalledWith(out);
  });

  it("re-renders byte-identically", () => {
    const a = tmpDir();
    const b = tmpDir();
    renderRun(GOLDEN_RUN, a);
    renderRun(GOLDEN_RUN, b);
    expect(fs.readFileSync(path.join(a, "summary.html"), "utf-8")).toBe(
      fs.readFileSync(path.join(b, "summary.html"), "utf-8"),
    );
    for (const name of fs.readdirSync(path.join(a, "figures"))) {
      expect(fs.readFileSync(path.join(a, "figures", name), "utf-8")).toBe(
        fs.readFileSync(path.join(b, "figures", name), "utf-8"),
      );
    }
  });
});

describe("linear run directory", () => {
  it("renders profile and regularity figures from its own files", () => {
    const out = tmpDir();
    const report = renderRun(GOLDEN_LINEAR, out);
    expect(report.rendered.sort()).toEqual([
      "blowup-profile",
      "holder-fit",
      "noise-paths",
      "norms",
    ]);
    expect(report.skipped).toEqual([]);
    const html = fs.readFileSync(path.join(out, "summary.html"), "utf-8");
    expect(html).toContain("critical Lebesgue order");
  });
});

describe("partial and missing inputs", () => {
  it("skips each missing CSV with a reason and still succeeds", () => {
    const src = tmpDir();
    fs.cpSync(GOLDEN_RUN, src, { recursive: true });
    fs.rmSync(path.join(src, "norms.csv"));
    fs.rmSync(path.join(src, "energy_residual.csv"));
    const out = tmpDir();
    const report = renderRun(src, out);
    const skippedNames = report.skipped.map((s) => s.name).sort();
    expect(skippedNames).toEqual(["energy-residual", "norms"]);
    for (const s of report.skipped) {
      expect(s.reason).toContain("listed in the manifest but missing");
    }
    expect(report.rendered).toContain("level-norms");
    const html = fs.readFileSync(path.join(out, "summary.html"), "utf-8");
    expect(html).toContain("Skipped figures");
  });

  it("skips an unreadable CSV with the parse failure as the reason", () => {
    const src = tmpDir();
    fs.cpSync(GOLDEN_RUN, src, { recursive: true });
    fs.writeFileSync(path.join(src, "level_norms.csv"), "time,level0_l2\n0.0,not-a-number\n");
    const report = renderRun(src, tmpDir());
    const skip = report.skipped.find((s) => s.name === "level-norms");
    expect(skip).toBeDefined();
    expect(skip!.reason).toContain("not a finite number");
  });

  it("fails only when every input is missing", () => {
    const src = tmpDir();
    fs.copyFileSync(path.join(GOLDEN_RUN, "manifest.json"), path.join(src, "manifest.json"));
    expect(() => renderRun(src, tmpDir())).toThrow(NoInputsError);
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main([src])).toBe(1);
    expect(err.mock.calls.some((c) => String(c[0]).includes("no renderable inputs"))).toBe(true);
  });

  it("names the manifest when the directory is empty", () => {
    const src = tmpDir();
    expect(() => renderRun(src, tmpDir())).toThrow(RunDirError);
    expect(() => renderRun(src, tmpDir())).toThrow(/manifest\.json/);
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main([src])).toBe(1);
    expect(err.mock.calls.some((c) => String(c[0]).includes("manifest.json"))).toBe(true);
  });

  it("writes nothing when the render fails outright", () => {
    const src = tmpDir();
    fs.copyFileSync(path.join(GOLDEN_RUN, "manifest.json"), path.join(src, "manifest.json"));
    const out = path.join(tmpDir(), "report");
    expect(() => renderRun(src, out)).toThrow(NoInputsError);
    expect(fs.existsSync(out)).toBe(false);
  });
});

describe("diagnostics directory rendered directly", () => {
  it("produces the diagnostic figures and checks", () => {
    const out = tmpDir();
    const report = renderRun(path.join(GOLDEN_RUN, "diagnostics"), out);
    expect(report.rendered.sort()).toEqual([
      "holder-fit",
      "interior-decay",
      "threshold-sups",
    ]);
    const html = fs.readFileSync(path.join(out, "summary.html"), "utf-8");
    expect(html).toContain("growth classification is monotone in the Lebesgue order");
  });
});

describe("argument handling", () => {
  it("rejects missing and unknown arguments with usage", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    expect(main([])).toBe(2);
    expect(main([GOLDEN_RUN, "--frobnicate"])).toBe(2);
    expect(main([GOLDEN_RUN, "extra", "positional"])).toBe(2);
    expect(main([GOLDEN_RUN, "--out"])).toBe(2);
    expect(err.mock.calls.length).toBeGreaterThan(0);
  });
});
