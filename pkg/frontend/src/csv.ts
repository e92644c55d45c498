/**
 * Reader for the fixed experiment-table schema:
 * experiment, estimator, <sweep cols...>, mse_pos, mse_vel, crlb_pos,
 * crlb_vel, outage_rate, trials, seed
 */

export class SchemaMismatch extends Error {
  constructor(column: string) {
    super(`CSV is missing required column '${column}'`);
    this.name = 'SchemaMismatch';
  }
}

export class NoRows extends Error {
  constructor() {
    super('CSV contains a header but no rows');
    this.name = 'NoRows';
  }
}

export type Cell = string | number | null;

export interface Table {
  columns: string[];
  rows: Record<string, Cell>[];
}

const SUFFIX = ['mse_pos', 'mse_vel', 'crlb_pos', 'crlb_vel', 'outage_rate', 'trials', 'seed'];

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaMismatch('experiment');
  }
  const columns = lines[0].split(',');
  for (const required of ['experiment', 'estimator', ...SUFFIX]) {
    if (!columns.includes(required)) {
      throw new SchemaMismatch(required);
    }
  }
  const rows = lines.slice(1).map((line) => {
    const cells = line.split(',');
    const row: Record<string, Cell> = {};
    columns.forEach((name, i) => {
      const raw = cells[i] ?? '';
      if (raw === '') {
        row[name] = null;
      } else {
        const num = Number(raw);
        row[name] = Number.isNaN(num) ? raw : num;
      }
    });
    return row;
  });
  if (rows.length === 0) {
    throw new NoRows();
  }
  return { columns, rows };
}

/** Sweep columns are whatever sits between the fixed prefix and suffix. */
export function sweepColumns(table: Table): string[] {
  return table.columns.filter(
    (c) => c !== 'experiment' && c !== 'estimator' && !SUFFIX.includes(c),
  );
}

export function requireColumn(table: Table, column: string): void {
  if (!table.columns.includes(column)) {
    throw new SchemaMismatch(column);
  }
}

export function numericValues(table: Table, column: string): number[] {
  requireColumn(table, column);
  return table.rows
    .map((row) => row[column])
    .filter((v): v is number => typeof v === 'number');
}

export function distinct<T extends Cell>(values: T[]): T[] {
  return [...new Set(values)];
}
