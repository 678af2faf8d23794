#!/usr/bin/env node
// CLI entry: render <run_dir> [--out <dir>]
//
// Exit codes: 0 on success (some figures may be skipped, reasons go to
// stderr and the summary), 1 when the directory has no manifest or no
// renderable inputs at all, 2 for usage errors.

import path from "node:path";
import process from "node:process";
import { pathToFileURL } from "node:url";

import { NoInputsError, renderRun, RunDirError } from "./render.js";

const USAGE = "usage: render <run_dir> [--out <dir>]";

export function main(argv: string[]): number {
  let runDir: string | null = null;
  let out: string | null = null;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]!;
    if (arg === "--out") {
      if (i + 1 >= argv.length) {
        console.error("error: --out needs a directory");
        console.error(USAGE);
        return 2;
      }
      out = argv[++i]!;
    } else if (arg === "--help" || arg === "-h") {
      console.log(USAGE);
      return 0;
    } else if (arg.startsWith("-")) {
      console.error(`error: unknown option ${arg}`);
      console.error(USAGE);
      return 2;
    } else if (runDir === null) {
      runDir = arg;
    } else {
      console.error(`error: unexpected argument ${arg}`);
      console.error(USAGE);
      return 2;
    }
  }
  if (runDir === null) {
    console.error(USAGE);
    return 2;
  }

  try {
    const report = renderRun(runDir, out ?? path.join(runDir, "report"));
    for (const s of report.skipped) {
      console.error(`skipped ${s.name}: ${s.reason}`);
    }
    console.log(report.outDir);
    return 0;
  } catch (err) {
    if (err instanceof RunDirError || err instanceof NoInputsError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
