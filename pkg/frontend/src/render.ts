/**
 * Command line entry: render one figure from an artifact bundle directory.
 *
 *   node dist/render.js <input-dir> <figure-kind> <output.svg>
 *
 * Exit codes: 0 on success, 1 when the input files fail schema checks,
 * 2 for usage errors (unknown kind, wrong extension, missing arguments).
 */
import { writeFileSync } from "node:fs";

import { SchemaError } from "./csv.js";
import {
  renderBoundEnvelope,
  renderDensityOverlay,
  renderPairCorrelation,
  type FigureResult,
} from "./figures.js";

export const KINDS = ["density-overlay", "pair-correlation", "bound-envelope"] as const;
export type Kind = (typeof KINDS)[number];

const USAGE = `usage: render <input-dir> <figure-kind> <output.svg>
figure kinds: ${KINDS.join(", ")}`;

export interface Io {
  out(line: string): void;
  err(line: string): void;
}

const NODE_IO: Io = {
  out: (line) => process.stdout.write(line + "\n"),
  err: (line) => process.stderr.write(line + "\n"),
};

/** Run the renderer on argv (without the node/script prefix); returns the exit code. */
export function runRender(argv: readonly string[], io: Io = NODE_IO): number {
  if (argv.length !== 3) {
    io.err(USAGE);
    return 2;
  }
  const [dir, kind, outPath] = argv as [string, string, string];
  if (!(KINDS as readonly string[]).includes(kind)) {
    io.err(`unknown figure kind "${kind}"`);
    io.err(USAGE);
    return 2;
  }
  if (!outPath.endsWith(".svg")) {
    if (outPath.endsWith(".png")) {
      io.err("png output is not supported; this tool writes SVG only. Use a .svg output path.");
    } else {
      io.err(`output path must end in .svg, got "${outPath}"`);
    }
    return 2;
  }

  let result: FigureResult;
  try {
    if (kind === "density-overlay") {
      result = renderDensityOverlay(dir);
    } else if (kind === "bound-envelope") {
      result = renderBoundEnvelope(dir);
    } else {
      result = renderPairCorrelation(dir);
    }
  } catch (err) {
    if (err instanceof SchemaError) {
      io.err(`schema error: ${err.message}`);
      return 1;
    }
    throw err;
  }

  for (const warning of result.warnings) {
    io.err(`warning: ${warning}`);
  }
  writeFileSync(outPath, result.svg, "utf8");
  io.out(`wrote ${outPath}`);
  return 0;
}

const isMain =
  process.argv[1] !== undefined &&
  (process.argv[1].endsWith("render.js") || process.argv[1].endsWith("render.ts"));
if (isMain) {
  process.exit(runRender(process.argv.slice(2)));
}
