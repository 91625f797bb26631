/**
 * Figure builders. Each takes an artifact bundle directory and returns the
 * finished SVG document plus any warnings about optional inputs that were
 * missing or empty. The three kinds are:
 *
 *   density-overlay   mean density with a 3-stderr band, analytic curves on top
 *   bound-envelope    density against its bound curves, verifier verdict marks
 *   pair-correlation  second-order correlation per sample time, bound levels
 */
import {
  loadAnalytic,
  loadDensity,
  loadPairCorrelation,
  loadReport,
  type CurvePoint,
  type DensityPoint,
} from "./artifacts.js";
import {
  DEFAULT_FRAME,
  LinearScale,
  axes,
  bandPath,
  color,
  escapeXml,
  fmt,
  legend,
  padExtent,
  polylinePoints,
  svgDocument,
  type LegendEntry,
} from "./svg.js";

export interface FigureResult {
  svg: string;
  warnings: string[];
}

const BOUNDISH = ["bound", "envelope", "level", "limit"];

/** Reference curves (bounds, envelopes, plateau levels) render dashed. */
export function isBoundish(name: string): boolean {
  const lower = name.toLowerCase();
  return BOUNDISH.some((word) => lower.includes(word));
}

function scales(
  xLo: number,
  xHi: number,
  yLo: number,
  yHi: number,
): { sx: LinearScale; sy: LinearScale } {
  const frame = DEFAULT_FRAME;
  const [px0, px1] = padExtent(xLo, xHi);
  const [py0, py1] = padExtent(yLo, yHi);
  const sx = new LinearScale([px0, px1], [frame.left, frame.width - frame.right]);
  const sy = new LinearScale([py0, py1], [frame.height - frame.bottom, frame.top]);
  return { sx, sy };
}

function densityExtent(density: DensityPoint[], curves: Map<string, CurvePoint[]>) {
  let xLo = Infinity;
  let xHi = -Infinity;
  let yLo = Infinity;
  let yHi = -Infinity;
  for (const p of density) {
    xLo = Math.min(xLo, p.time);
    xHi = Math.max(xHi, p.time);
    yLo = Math.min(yLo, p.mean - 3 * p.stderr);
    yHi = Math.max(yHi, p.mean + 3 * p.stderr);
  }
  for (const points of curves.values()) {
    for (const p of points) {
      xLo = Math.min(xLo, p.time);
      xHi = Math.max(xHi, p.time);
      yLo = Math.min(yLo, p.value);
      yHi = Math.max(yHi, p.value);
    }
  }
  return { xLo, xHi, yLo, yHi };
}

function densityLayers(
  density: DensityPoint[],
  sx: LinearScale,
  sy: LinearScale,
  entries: LegendEntry[],
): string[] {
  const xs = density.map((p) => p.time);
  const lo = density.map((p) => p.mean - 3 * p.stderr);
  const hi = density.map((p) => p.mean + 3 * p.stderr);
  const mean = density.map((p) => p.mean);
  const body: string[] = [];
  body.push(
    `<path class="band" d="${bandPath(xs, lo, hi, sx, sy)}" fill="${color(0)}" fill-opacity="0.15" stroke="none"/>`,
  );
  body.push(
    `<polyline class="curve" points="${polylinePoints(xs, mean, sx, sy)}" fill="none" stroke="${color(0)}" stroke-width="2"/>`,
  );
  entries.push({ label: "empirical mean (3 SE band)", stroke: color(0), dashed: false });
  return body;
}

function curveLayers(
  curves: Map<string, CurvePoint[]>,
  sx: LinearScale,
  sy: LinearScale,
  entries: LegendEntry[],
  firstColor: number,
): string[] {
  const body: string[] = [];
  let index = firstColor;
  for (const [name, points] of curves.entries()) {
    const stroke = color(index);
    index += 1;
    const dash = isBoundish(name) ? ` stroke-dasharray="6 3"` : "";
    const xs = points.map((p) => p.time);
    const ys = points.map((p) => p.value);
    body.push(
      `<polyline class="curve" data-curve="${escapeXml(name)}" points="${polylinePoints(xs, ys, sx, sy)}" fill="none" stroke="${stroke}" stroke-width="1.8"${dash}/>`,
    );
    entries.push({ label: name, stroke, dashed: isBoundish(name) });
  }
  return body;
}

/** Mean density with its stderr band, analytic reference curves overlaid. */
export function renderDensityOverlay(dir: string): FigureResult {
  const warnings: string[] = [];
  const density = loadDensity(dir);
  const curves = loadAnalytic(dir);
  if (curves.size === 0) {
    warnings.push("analytic.csv has no curves; rendering the empirical density only");
  }
  const { xLo, xHi, yLo, yHi } = densityExtent(density, curves);
  const { sx, sy } = scales(xLo, xHi, yLo, yHi);
  const entries: LegendEntry[] = [];
  const body: string[] = [];
  body.push(axes(sx, sy, DEFAULT_FRAME, "time", "density"));
  body.push(...densityLayers(density, sx, sy, entries));
  body.push(...curveLayers(curves, sx, sy, entries, 1));
  body.push(legend(entries, DEFAULT_FRAME));
  return {
    svg: svgDocument(DEFAULT_FRAME, "Density overlay", body.join("\n")),
    warnings,
  };
}

/**
 * Density against its bound curves. One-sided verifier records named after
 * one of those curves are drawn as markers at (time, analytic); a failed
 * record is red.
 */
export function renderBoundEnvelope(dir: string): FigureResult {
  const warnings: string[] = [];
  const density = loadDensity(dir);
  const allCurves = loadAnalytic(dir);
  const curves = new Map([...allCurves.entries()].filter(([name]) => isBoundish(name)));
  if (curves.size === 0) {
    warnings.push("no bound or envelope curves in analytic.csv; rendering the empirical density only");
  }
  const report = loadReport(dir);
  if (report === null) {
    warnings.push("report.json not found; skipping verdict markers");
  }
  // A verdict marker only makes sense on the curve it tested, so records are
  // matched by name against the bound curves actually present. This keeps
  // records on other scales (pair correlation, energy margins) off the
  // density axes.
  const records = (report?.records ?? []).filter(
    (r) => curves.has(r.name) && (r.kind === "upper" || r.kind === "lower"),
  );

  const ext = densityExtent(density, curves);
  for (const r of records) {
    ext.xLo = Math.min(ext.xLo, r.time);
    ext.xHi = Math.max(ext.xHi, r.time);
    ext.yLo = Math.min(ext.yLo, r.analytic);
    ext.yHi = Math.max(ext.yHi, r.analytic);
  }
  const { sx, sy } = scales(ext.xLo, ext.xHi, ext.yLo, ext.yHi);
  const entries: LegendEntry[] = [];
  const body: string[] = [];
  body.push(axes(sx, sy, DEFAULT_FRAME, "time", "density"));
  body.push(...densityLayers(density, sx, sy, entries));
  body.push(...curveLayers(curves, sx, sy, entries, 1));
  for (const r of records) {
    const cx = fmt(sx.map(r.time));
    const cy = fmt(sy.map(r.analytic));
    const fill = r.passed ? "#2f855a" : "#c53030";
    const title = `${r.name} at t=${fmt(r.time)}: ${r.passed ? "pass" : "FAIL"} (empirical ${fmt(r.empirical)}, bound ${fmt(r.analytic)})`;
    body.push(
      `<g class="verdict" data-name="${escapeXml(r.name)}" data-passed="${r.passed}">` +
        `<circle cx="${cx}" cy="${cy}" r="4" fill="${fill}" stroke="#fff" stroke-width="1"/>` +
        `<title>${escapeXml(title)}</title></g>`,
    );
  }
  if (records.length > 0) {
    entries.push({ label: "bound check pass", stroke: "#2f855a", dashed: false });
    if (records.some((r) => !r.passed)) {
      entries.push({ label: "bound check FAIL", stroke: "#c53030", dashed: false });
    }
  }
  body.push(legend(entries, DEFAULT_FRAME));
  return {
    svg: svgDocument(DEFAULT_FRAME, "Bound envelope", body.join("\n")),
    warnings,
  };
}

/** Correlation against pair distance, one curve per sample time. */
export function renderPairCorrelation(dir: string): FigureResult {
  const warnings: string[] = [];
  const byTime = loadPairCorrelation(dir);
  const report = loadReport(dir);
  const levels = new Map<number, number>();
  if (report !== null) {
    for (const r of report.records) {
      if (r.name === "pair_bound" && r.kind === "upper") {
        const prev = levels.get(r.time);
        levels.set(r.time, prev === undefined ? r.analytic : Math.max(prev, r.analytic));
      }
    }
  }

  let xLo = Infinity;
  let xHi = -Infinity;
  let yLo = Infinity;
  let yHi = -Infinity;
  for (const bins of byTime.values()) {
    for (const b of bins) {
      const mid = 0.5 * (b.rLo + b.rHi);
      xLo = Math.min(xLo, mid);
      xHi = Math.max(xHi, mid);
      yLo = Math.min(yLo, b.k2 - 3 * b.stderr);
      yHi = Math.max(yHi, b.k2 + 3 * b.stderr);
    }
  }
  for (const level of levels.values()) {
    yLo = Math.min(yLo, level);
    yHi = Math.max(yHi, level);
  }
  const { sx, sy } = scales(xLo, xHi, yLo, yHi);
  const entries: LegendEntry[] = [];
  const body: string[] = [];
  body.push(axes(sx, sy, DEFAULT_FRAME, "pair distance", "correlation"));
  let index = 0;
  for (const [time, bins] of byTime.entries()) {
    const stroke = color(index);
    index += 1;
    const xs = bins.map((b) => 0.5 * (b.rLo + b.rHi));
    const lo = bins.map((b) => b.k2 - 3 * b.stderr);
    const hi = bins.map((b) => b.k2 + 3 * b.stderr);
    const mid = bins.map((b) => b.k2);
    body.push(
      `<path class="band" d="${bandPath(xs, lo, hi, sx, sy)}" fill="${stroke}" fill-opacity="0.12" stroke="none"/>`,
    );
    body.push(
      `<polyline class="curve" data-time="${fmt(time)}" points="${polylinePoints(xs, mid, sx, sy)}" fill="none" stroke="${stroke}" stroke-width="1.8"/>`,
    );
    entries.push({ label: `t = ${fmt(time)}`, stroke, dashed: false });
    const level = levels.get(time);
    if (level !== undefined) {
      const y = fmt(sy.map(level));
      body.push(
        `<line class="bound-level" data-time="${fmt(time)}" x1="${DEFAULT_FRAME.left}" y1="${y}" x2="${DEFAULT_FRAME.width - DEFAULT_FRAME.right}" y2="${y}" stroke="${stroke}" stroke-width="1.2" stroke-dasharray="6 3"/>`,
      );
    }
  }
  if (levels.size > 0) {
    entries.push({ label: "pair bound level", stroke: "#555", dashed: true });
  } else if (report !== null) {
    warnings.push("report.json has no pair bound records; rendering correlations only");
  }
  body.push(legend(entries, DEFAULT_FRAME));
  return {
    svg: svgDocument(DEFAULT_FRAME, "Pair correlation", body.join("\n")),
    warnings,
  };
}
