// Strict readers for the two harness text formats: CSV (RFC-4180 quoting,
// as written by the batch runner) and JSONL (one object per line). Both fail
// loudly on malformed input; figures must never be built from half-read data.

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: string[][];
}

/** Parse CSV text into a header plus data rows; ragged rows are an error. */
export const parseCsv = (text: string, label: string): Table => {
  const records: string[][] = [];
  let field = "";
  let record: string[] = [];
  let quoted = false;
  let i = 0;
  while (i < text.length) {
    const ch = text[i];
    if (quoted) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"' && field === "") {
      quoted = true;
      i += 1;
      continue;
    }
    if (ch === ",") {
      record.push(field);
      field = "";
      i += 1;
      continue;
    }
    if (ch === "\n" || ch === "\r") {
      record.push(field);
      records.push(record);
      field = "";
      record = [];
      i += ch === "\r" && text[i + 1] === "\n" ? 2 : 1;
      continue;
    }
    field += ch;
    i += 1;
  }
  if (quoted) {
    throw new SchemaError(`${label}: unterminated quoted field`);
  }
  if (field !== "" || record.length > 0) {
    record.push(field);
    records.push(record);
  }
  const header = records[0];
  if (header === undefined) {
    throw new SchemaError(`${label}: empty file, no header row`);
  }
  const rows = records.slice(1);
  for (let r = 0; r < rows.length; r++) {
    const row = rows[r]!;
    if (row.length !== header.length) {
      throw new SchemaError(
        `${label}: row ${r + 2} has ${row.length} fields, header has ${header.length}`,
      );
    }
  }
  return { columns: header, rows };
};

/** Fail with the first missing column named, so schema drift is diagnosable. */
export const requireColumns = (table: Table, needed: string[], label: string): void => {
  for (const column of needed) {
    if (!table.columns.includes(column)) {
      throw new SchemaError(`${label}: missing column "${column}"`);
    }
  }
};

/** Column values as numbers; blank or non-numeric cells are an error. */
export const numberColumn = (table: Table, column: string, label: string): number[] => {
  const index = table.columns.indexOf(column);
  if (index < 0) {
    throw new SchemaError(`${label}: missing column "${column}"`);
  }
  return table.rows.map((row, r) => {
    const cell = row[index]!;
    const value = Number(cell);
    if (cell.trim() === "" || !Number.isFinite(value)) {
      throw new SchemaError(`${label}: row ${r + 2} column "${column}" is not a number: "${cell}"`);
    }
    return value;
  });
};

/** Parse JSONL text; each non-empty line must be a JSON object. */
export const parseJsonl = (text: string, label: string): Record<string, unknown>[] => {
  const objects: Record<string, unknown>[] = [];
  const lines = text.split("\n");
  for (let n = 0; n < lines.length; n++) {
    const line = lines[n]!.trim();
    if (line === "") {
      continue;
    }
    let value: unknown;
    try {
      value = JSON.parse(line);
    } catch {
      throw new SchemaError(`${label}: line ${n + 1} is not valid JSON`);
    }
    if (typeof value !== "object" || value === null || Array.isArray(value)) {
      throw new SchemaError(`${label}: line ${n + 1} is not a JSON object`);
    }
    objects.push(value as Record<string, unknown>);
  }
  return objects;
};

/** Pull a required key out of a parsed JSONL object, naming it on absence. */
export const requireKey = (
  object: Record<string, unknown>,
  key: string,
  label: string,
): unknown => {
  if (!(key in object)) {
    throw new SchemaError(`${label}: missing key "${key}"`);
  }
  return object[key];
};
