/**
 * Strict reader for the artifact CSV dialect: comma separated, LF lines,
 * no quoting, one header row.  Every load states which columns it needs;
 * anything missing or non-numeric is reported by file and column name so a
 * schema drift fails loudly instead of plotting garbage.
 */
import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export type Row = Record<string, string>;

export function readTable(path: string, required: readonly string[]): Row[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SchemaError(`${path}: cannot read file (${(err as Error).message})`);
  }
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file, expected a header row`);
  }
  const header = (lines[0] ?? "").split(",");
  for (const column of required) {
    if (!header.includes(column)) {
      throw new SchemaError(`${path}: missing column "${column}" (header: ${header.join(", ")})`);
    }
  }
  const rows: Row[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = (lines[i] ?? "").split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${path}: row ${i + 1} has ${cells.length} fields, header has ${header.length}`,
      );
    }
    const row: Row = {};
    header.forEach((name, j) => {
      row[name] = cells[j] ?? "";
    });
    rows.push(row);
  }
  return rows;
}

export function numeric(row: Row, column: string, path: string, rowIndex: number): number {
  const cell = row[column];
  const value = Number(cell);
  if (cell === undefined || cell.trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(
      `${path}: column "${column}" has non-numeric value "${cell}" at row ${rowIndex + 2}`,
    );
  }
  return value;
}
