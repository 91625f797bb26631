/**
 * Small hand-rolled SVG helpers: linear scales, tick placement, polyline and
 * band path builders, axes. No drawing library; the output is plain markup.
 */

/** Compact number formatting for tick labels and path data. */
export function fmt(x: number): string {
  if (!Number.isFinite(x)) {
    return String(x);
  }
  if (x === 0) {
    return "0";
  }
  const abs = Math.abs(x);
  if (abs >= 1e5 || abs < 1e-3) {
    return x.toExponential(2);
  }
  const rounded = Number(x.toFixed(4));
  return String(rounded);
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class LinearScale {
  readonly d0: number;
  readonly d1: number;
  readonly r0: number;
  readonly r1: number;

  constructor(domain: readonly [number, number], range: readonly [number, number]) {
    let [d0, d1] = domain;
    if (d0 === d1) {
      // Degenerate domains still need to map somewhere sensible.
      d0 -= 0.5;
      d1 += 0.5;
    }
    this.d0 = d0;
    this.d1 = d1;
    this.r0 = range[0];
    this.r1 = range[1];
  }

  map(x: number): number {
    const t = (x - this.d0) / (this.d1 - this.d0);
    return this.r0 + t * (this.r1 - this.r0);
  }

  /** Round tick positions at a 1/2/5 step, clipped to the domain. */
  ticks(target = 5): number[] {
    const span = this.d1 - this.d0;
    const rawStep = span / Math.max(1, target);
    const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(rawStep))));
    const residual = rawStep / mag;
    let step: number;
    if (residual >= 5) {
      step = 10 * mag;
    } else if (residual >= 2) {
      step = 5 * mag;
    } else if (residual >= 1) {
      step = 2 * mag;
    } else {
      step = mag;
    }
    const first = Math.ceil(this.d0 / step) * step;
    const out: number[] = [];
    for (let v = first; v <= this.d1 + step * 1e-9; v += step) {
      // Snap values like 0.30000000000000004 back onto the grid.
      out.push(Number(v.toFixed(10)));
    }
    return out;
  }
}

/** Pad a [min, max] data extent so curves do not sit on the frame. */
export function padExtent(lo: number, hi: number, frac = 0.06): [number, number] {
  if (lo === hi) {
    const pad = lo === 0 ? 1 : Math.abs(lo) * frac;
    return [lo - pad, hi + pad];
  }
  const pad = (hi - lo) * frac;
  return [lo - pad, hi + pad];
}

export function polylinePoints(
  xs: readonly number[],
  ys: readonly number[],
  sx: LinearScale,
  sy: LinearScale,
): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${fmt(sx.map(xs[i]!))},${fmt(sy.map(ys[i]!))}`);
  }
  return parts.join(" ");
}

/** Closed path tracing y_hi forward then y_lo in reverse, for error bands. */
export function bandPath(
  xs: readonly number[],
  yLo: readonly number[],
  yHi: readonly number[],
  sx: LinearScale,
  sy: LinearScale,
): string {
  if (xs.length === 0) {
    return "";
  }
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    const cmd = i === 0 ? "M" : "L";
    parts.push(`${cmd}${fmt(sx.map(xs[i]!))},${fmt(sy.map(yHi[i]!))}`);
  }
  for (let i = xs.length - 1; i >= 0; i--) {
    parts.push(`L${fmt(sx.map(xs[i]!))},${fmt(sy.map(yLo[i]!))}`);
  }
  return parts.join(" ") + "Z";
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_FRAME: Frame = {
  width: 640,
  height: 420,
  left: 62,
  right: 18,
  top: 34,
  bottom: 48,
};

/** Muted qualitative palette; index wraps. */
export const PALETTE = ["#2b6cb0", "#c05621", "#2f855a", "#805ad5", "#b83280", "#718096"];

export function color(i: number): string {
  return PALETTE[i % PALETTE.length]!;
}

export function axes(
  sx: LinearScale,
  sy: LinearScale,
  frame: Frame,
  xLabel: string,
  yLabel: string,
): string {
  const lines: string[] = [];
  const x0 = frame.left;
  const x1 = frame.width - frame.right;
  const y0 = frame.height - frame.bottom;
  const y1 = frame.top;
  lines.push(`<g class="axes" stroke="#444" fill="none">`);
  lines.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}"/>`);
  lines.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}"/>`);
  lines.push(`</g>`);
  lines.push(`<g class="ticks" font-size="11" fill="#333">`);
  for (const t of sx.ticks()) {
    const px = sx.map(t);
    lines.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="#444"/>`);
    lines.push(
      `<text x="${fmt(px)}" y="${y0 + 18}" text-anchor="middle">${escapeXml(fmt(t))}</text>`,
    );
  }
  for (const t of sy.ticks()) {
    const py = sy.map(t);
    lines.push(`<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="#444"/>`);
    lines.push(
      `<text x="${x0 - 8}" y="${fmt(py + 4)}" text-anchor="end">${escapeXml(fmt(t))}</text>`,
    );
    lines.push(
      `<line x1="${x0}" y1="${fmt(py)}" x2="${x1}" y2="${fmt(py)}" stroke="#000" stroke-opacity="0.06"/>`,
    );
  }
  lines.push(`</g>`);
  const xMid = (x0 + x1) / 2;
  const yMid = (y0 + y1) / 2;
  lines.push(
    `<text x="${fmt(xMid)}" y="${frame.height - 10}" text-anchor="middle" font-size="13" fill="#111">${escapeXml(xLabel)}</text>`,
  );
  lines.push(
    `<text x="16" y="${fmt(yMid)}" text-anchor="middle" font-size="13" fill="#111" transform="rotate(-90 16 ${fmt(yMid)})">${escapeXml(yLabel)}</text>`,
  );
  return lines.join("\n");
}

export interface LegendEntry {
  label: string;
  stroke: string;
  dashed: boolean;
}

export function legend(entries: readonly LegendEntry[], frame: Frame): string {
  if (entries.length === 0) {
    return "";
  }
  const lines: string[] = [`<g class="legend" font-size="11" fill="#333">`];
  const x = frame.width - frame.right - 170;
  let y = frame.top + 10;
  for (const entry of entries) {
    const dash = entry.dashed ? ` stroke-dasharray="6 3"` : "";
    lines.push(
      `<line x1="${x}" y1="${y}" x2="${x + 26}" y2="${y}" stroke="${entry.stroke}" stroke-width="2"${dash}/>`,
    );
    lines.push(`<text x="${x + 32}" y="${y + 4}">${escapeXml(entry.label)}</text>`);
    y += 16;
  }
  lines.push(`</g>`);
  return lines.join("\n");
}

export function svgDocument(frame: Frame, title: string, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}" font-family="sans-serif">`,
    `<rect width="${frame.width}" height="${frame.height}" fill="#ffffff"/>`,
    `<text x="${frame.width / 2}" y="20" text-anchor="middle" font-size="14" fill="#111">${escapeXml(title)}</text>`,
    body,
    `</svg>`,
    ``,
  ].join("\n");
}
