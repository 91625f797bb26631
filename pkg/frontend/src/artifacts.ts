/**
 * Typed views of one artifact bundle directory, as documented in the main
 * README: density.csv, analytic.csv, pair_correlation.csv, report.json.
 * Only the documented formats are consumed; nothing here reaches into the
 * simulator.
 */
import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

import { SchemaError, numeric, readTable } from "./csv.js";

export interface DensityPoint {
  time: number;
  mean: number;
  stderr: number;
}

export interface CurvePoint {
  time: number;
  value: number;
}

export interface PairBin {
  rLo: number;
  rHi: number;
  k2: number;
  stderr: number;
}

export interface ReportRecord {
  name: string;
  kind: string;
  time: number;
  empirical: number;
  analytic: number;
  passed: boolean;
  context: string;
}

export interface Report {
  check: string;
  overallPass: boolean;
  records: ReportRecord[];
}

export function loadDensity(dir: string): DensityPoint[] {
  const path = join(dir, "density.csv");
  const rows = readTable(path, ["time", "mean_density", "stderr"]);
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const points = rows.map((row, i) => ({
    time: numeric(row, "time", path, i),
    mean: numeric(row, "mean_density", path, i),
    stderr: numeric(row, "stderr", path, i),
  }));
  points.sort((a, b) => a.time - b.time);
  return points;
}

/** Curves keyed by curve_name, preserving first-appearance order. */
export function loadAnalytic(dir: string): Map<string, CurvePoint[]> {
  const path = join(dir, "analytic.csv");
  const rows = readTable(path, ["time", "value", "curve_name"]);
  const curves = new Map<string, CurvePoint[]>();
  rows.forEach((row, i) => {
    const name = row["curve_name"] ?? "";
    if (name === "") {
      throw new SchemaError(`${path}: column "curve_name" is empty at row ${i + 2}`);
    }
    const point = {
      time: numeric(row, "time", path, i),
      value: numeric(row, "value", path, i),
    };
    const existing = curves.get(name);
    if (existing === undefined) {
      curves.set(name, [point]);
    } else {
      existing.push(point);
    }
  });
  return curves;
}

/** Pair-correlation bins grouped by sample time, keyed in time order. */
export function loadPairCorrelation(dir: string): Map<number, PairBin[]> {
  const path = join(dir, "pair_correlation.csv");
  const rows = readTable(path, ["time", "r_lo", "r_hi", "k2", "stderr"]);
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const byTime = new Map<number, PairBin[]>();
  rows.forEach((row, i) => {
    const time = numeric(row, "time", path, i);
    const bin = {
      rLo: numeric(row, "r_lo", path, i),
      rHi: numeric(row, "r_hi", path, i),
      k2: numeric(row, "k2", path, i),
      stderr: numeric(row, "stderr", path, i),
    };
    const existing = byTime.get(time);
    if (existing === undefined) {
      byTime.set(time, [bin]);
    } else {
      existing.push(bin);
    }
  });
  return new Map([...byTime.entries()].sort((a, b) => a[0] - b[0]));
}

/** report.json is optional (simulate-only bundles do not have one). */
export function loadReport(dir: string): Report | null {
  const path = join(dir, "report.json");
  if (!existsSync(path)) {
    return null;
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError(`${path}: invalid JSON (${(err as Error).message})`);
  }
  const top = parsed as { check?: unknown; overall_pass?: unknown; records?: unknown };
  if (!Array.isArray(top.records)) {
    throw new SchemaError(`${path}: missing field "records"`);
  }
  const records = top.records.map((raw, i) => {
    const rec = raw as Record<string, unknown>;
    for (const field of ["name", "kind", "time", "empirical", "analytic", "passed"]) {
      if (!(field in rec)) {
        throw new SchemaError(`${path}: record ${i} is missing field "${field}"`);
      }
    }
    return {
      name: String(rec["name"]),
      kind: String(rec["kind"]),
      time: Number(rec["time"]),
      empirical: Number(rec["empirical"]),
      analytic: Number(rec["analytic"]),
      passed: Boolean(rec["passed"]),
      context: String(rec["context"] ?? ""),
    };
  });
  return {
    check: String(top.check ?? ""),
    overallPass: Boolean(top.overall_pass),
    records,
  };
}
