#!/usr/bin/env node
/**
 * Figure rendering CLI:
 *   plot <kind> --csv PATH --out PATH [--metric pos|vel] [--layout NAME]
 *                [--threshold N | --manifest PATH]
 *
 * Kinds: snr_lines | sweep_lines | sweep_heatmap | coverage_map.
 * The manifest written beside each experiment CSV supplies the coverage
 * threshold when --threshold is not given. Nothing is written on error.
 */

import * as fs from 'fs';

import { NoRows, SchemaMismatch, parseCsv } from './csv';
import { FIGURE_KINDS, FigureKind, FigureOptions, render } from './figures';

interface Args {
  kind: FigureKind;
  csv: string;
  out: string;
  options: FigureOptions;
}

export function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new Error(
      `usage: plot <${Object.keys(FIGURE_KINDS).join('|')}> --csv PATH --out PATH`,
    );
  }
  const [kind, ...rest] = argv;
  if (!(kind in FIGURE_KINDS)) {
    throw new Error(`unknown figure kind '${kind}'`);
  }
  const flags = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    const value = rest[i + 1];
    if (!key.startsWith('--') || value === undefined) {
      throw new Error(`malformed flag near '${key}'`);
    }
    flags.set(key.slice(2), value);
  }
  const csv = flags.get('csv');
  const out = flags.get('out');
  if (!csv || !out) {
    throw new Error('--csv and --out are required');
  }
  const options: FigureOptions = {};
  const metric = flags.get('metric');
  if (metric) {
    if (metric !== 'pos' && metric !== 'vel') throw new Error("--metric must be 'pos' or 'vel'");
    options.metric = metric;
  }
  if (flags.has('layout')) options.layout = flags.get('layout');
  if (flags.has('threshold')) {
    const t = Number(flags.get('threshold'));
    if (Number.isNaN(t)) throw new Error('--threshold must be numeric');
    options.threshold = t;
  } else if (flags.has('manifest')) {
    options.threshold = thresholdFromManifest(flags.get('manifest')!);
  }
  if (flags.has('title')) options.title = flags.get('title');
  return { kind: kind as FigureKind, csv, out, options };
}

/** Read the coverage threshold from a run manifest (dotted key = value). */
export function thresholdFromManifest(path: string): number | undefined {
  const text = fs.readFileSync(path, 'utf-8');
  for (const raw of text.split(/\r?\n/)) {
    const line = raw.split('#', 1)[0].trim();
    const match = /^experiment\.heatmap_threshold_pos\s*=\s*(.+)$/.exec(line);
    if (match) {
      const value = Number(match[1]);
      if (!Number.isNaN(value)) return value;
    }
  }
  return undefined;
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 1;
  }
  try {
    const table = parseCsv(fs.readFileSync(args.csv, 'utf-8'));
    const fig = render(args.kind, table, args.options);
    fs.writeFileSync(args.out, fig.svg);
    process.stdout.write(`wrote ${args.out} (${fig.seriesCount} series elements)\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatch || err instanceof NoRows) {
      process.stderr.write(`${(err as Error).name}: ${(err as Error).message}\n`);
      return 1;
    }
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
