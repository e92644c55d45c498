/**
 * The four figure kinds rendered from experiment tables:
 *   snr_lines     - MSE and bound versus SNR, log-scaled error axis
 *   sweep_lines   - bound traces along a sweep axis per layout
 *   sweep_heatmap - normalized bound over the (span, pulses) grid
 *   coverage_map  - position-bound map with threshold contour and stations
 */

import {
  Cell,
  NoRows,
  SchemaMismatch,
  Table,
  distinct,
  numericValues,
  requireColumn,
} from './csv';
import {
  SERIES_COLORS,
  Scale,
  SvgDoc,
  fmt,
  heatColor,
  linearScale,
  logScale,
  logTicks,
  ticks,
} from './svg';

export type Metric = 'pos' | 'vel';

export interface FigureOptions {
  metric?: Metric;
  layout?: string;
  threshold?: number;
  /** station coordinates [x, y][] overlaid on coverage maps */
  stations?: Array<[number, number]>;
  title?: string;
}

export interface Figure {
  svg: string;
  seriesCount: number;
}

const num = (v: Cell): number | null => (typeof v === 'number' ? v : null);

function finitePositive(values: Array<number | null>): number[] {
  return values.filter((v): v is number => v !== null && v > 0 && Number.isFinite(v));
}

export function snrLines(table: Table, opts: FigureOptions = {}): Figure {
  const metric = opts.metric ?? 'pos';
  const mseCol = `mse_${metric}`;
  const crlbCol = `crlb_${metric}`;
  requireColumn(table, 'snr_db');
  requireColumn(table, mseCol);
  requireColumn(table, crlbCol);

  const estimators = distinct(table.rows.map((r) => r.estimator)) as string[];
  const snrs = distinct(numericValues(table, 'snr_db')).sort((a, b) => a - b);
  const allY = finitePositive(
    table.rows.flatMap((r) => [num(r[mseCol]), num(r[crlbCol])]),
  );
  if (allY.length === 0 || snrs.length === 0) {
    throw new NoRows();
  }

  const doc = new SvgDoc();
  const { x: xr, y: yr } = doc.plotRange;
  const xs = linearScale([snrs[0], snrs[snrs.length - 1]], xr);
  const ys = logScale([Math.min(...allY) / 2, Math.max(...allY) * 2], yr);

  let seriesCount = 0;
  const legend: Array<{ label: string; color: string }> = [];
  estimators.forEach((est, i) => {
    const pts: Array<[number, number]> = [];
    for (const snr of snrs) {
      const row = table.rows.find((r) => r.estimator === est && r.snr_db === snr);
      const v = row ? num(row[mseCol]) : null;
      if (v !== null && v > 0) pts.push([xs(snr), ys(v)]);
    }
    if (pts.length > 0) {
      const color = SERIES_COLORS[i % SERIES_COLORS.length];
      doc.polyline(pts, color);
      legend.push({ label: `${est.toUpperCase()} MSE`, color });
      seriesCount += 1;
    }
  });
  // one bound curve; identical across estimator rows
  const boundPts: Array<[number, number]> = [];
  for (const snr of snrs) {
    const row = table.rows.find((r) => r.snr_db === snr && num(r[crlbCol]) !== null);
    const v = row ? num(row[crlbCol]) : null;
    if (v !== null && v > 0) boundPts.push([xs(snr), ys(v)]);
  }
  if (boundPts.length > 0) {
    const color = SERIES_COLORS[(estimators.length + 1) % SERIES_COLORS.length];
    doc.polyline(boundPts, color, 'series bound');
    legend.push({ label: 'CRLB', color });
    seriesCount += 1;
  }

  doc.xAxis(xs, snrs, 'SNR [dB]');
  doc.yAxis(ys, logTicks(ys.domain[0], ys.domain[1]), metric === 'pos' ? 'MSE [m^2]' : 'MSE [m^2/s^2]');
  doc.title(opts.title ?? `${metric === 'pos' ? 'Position' : 'Velocity'} MSE vs SNR`);
  doc.legend(legend);
  return { svg: doc.render(), seriesCount };
}

function pickSweepAxis(table: Table): 'span_mhz' | 'pulses' {
  requireColumn(table, 'span_mhz');
  requireColumn(table, 'pulses');
  const spanVals = distinct(numericValues(table, 'span_mhz'));
  return spanVals.length > 1 ? 'span_mhz' : 'pulses';
}

export function sweepLines(table: Table, opts: FigureOptions = {}): Figure {
  const metric = opts.metric ?? 'pos';
  const valueCol = `crlb_${metric}`;
  requireColumn(table, 'layout');
  requireColumn(table, valueCol);
  const axis = pickSweepAxis(table);
  const layouts = distinct(table.rows.map((r) => r.layout)) as string[];
  const xsVals = distinct(numericValues(table, axis)).sort((a, b) => a - b);
  const yVals = finitePositive(table.rows.map((r) => num(r[valueCol])));
  if (xsVals.length === 0 || yVals.length === 0) throw new NoRows();

  const doc = new SvgDoc();
  const { x: xr, y: yr } = doc.plotRange;
  const xs = linearScale([xsVals[0], xsVals[xsVals.length - 1]], xr);
  const ys = logScale([Math.min(...yVals) / 2, Math.max(...yVals) * 2], yr);

  let seriesCount = 0;
  const legend: Array<{ label: string; color: string }> = [];
  layouts.forEach((layout, i) => {
    const pts: Array<[number, number]> = [];
    for (const v of xsVals) {
      const row = table.rows.find((r) => r.layout === layout && r[axis] === v);
      const y = row ? num(row[valueCol]) : null;
      if (y !== null && y > 0) pts.push([xs(v), ys(y)]);
    }
    if (pts.length > 0) {
      const color = SERIES_COLORS[i % SERIES_COLORS.length];
      doc.polyline(pts, color);
      legend.push({ label: layout, color });
      seriesCount += 1;
    }
  });

  doc.xAxis(xs, ticks(xsVals[0], xsVals[xsVals.length - 1]), axis === 'span_mhz' ? 'Synthesized span [MHz]' : 'Pulses');
  doc.yAxis(ys, logTicks(ys.domain[0], ys.domain[1]), `CRLB ${metric} trace`);
  doc.title(opts.title ?? `Bound sweep along ${axis === 'span_mhz' ? 'bandwidth' : 'pulse count'}`);
  doc.legend(legend);
  return { svg: doc.render(), seriesCount };
}

function gridHeatmap(
  doc: SvgDoc,
  xsVals: number[],
  ysVals: number[],
  value: (x: number, y: number) => number | null,
): { cells: number; lo: number; hi: number } {
  const { x: xr, y: yr } = doc.plotRange;
  const logs: number[] = [];
  for (const gx of xsVals) {
    for (const gy of ysVals) {
      const v = value(gx, gy);
      if (v !== null && v > 0) logs.push(Math.log10(v));
    }
  }
  if (logs.length === 0) throw new NoRows();
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);
  const span = hi - lo || 1;
  const cw = (xr[1] - xr[0]) / xsVals.length;
  const ch = (yr[0] - yr[1]) / ysVals.length;
  let cells = 0;
  xsVals.forEach((gx, i) => {
    ysVals.forEach((gy, j) => {
      const v = value(gx, gy);
      const px = xr[0] + i * cw;
      const py = yr[0] - (j + 1) * ch;
      if (v === null) {
        doc.rect(px, py, cw, ch, '#bbbbbb', 'cell masked');
      } else {
        doc.rect(px, py, cw, ch, heatColor((Math.log10(v) - lo) / span), 'cell');
      }
      cells += 1;
    });
  });
  return { cells, lo, hi };
}

export function sweepHeatmap(table: Table, opts: FigureOptions = {}): Figure {
  const metric = opts.metric ?? 'pos';
  const valueCol = `crlb_${metric}`;
  requireColumn(table, 'layout');
  requireColumn(table, valueCol);
  requireColumn(table, 'span_mhz');
  requireColumn(table, 'pulses');
  const layouts = distinct(table.rows.map((r) => r.layout)) as string[];
  const layout = opts.layout ?? layouts[0];
  const rows = table.rows.filter((r) => r.layout === layout);
  if (rows.length === 0) throw new NoRows();
  const xsVals = distinct(rows.map((r) => r.span_mhz as number)).sort((a, b) => a - b);
  const ysVals = distinct(rows.map((r) => r.pulses as number)).sort((a, b) => a - b);

  const doc = new SvgDoc();
  const { cells } = gridHeatmap(doc, xsVals, ysVals, (gx, gy) => {
    const row = rows.find((r) => r.span_mhz === gx && r.pulses === gy);
    return row ? num(row[valueCol]) : null;
  });

  const { x: xr, y: yr } = doc.plotRange;
  const xs = linearScale([0, xsVals.length], xr);
  const ys = linearScale([0, ysVals.length], [yr[0], yr[1]]);
  doc.xAxis(xs, [], '');
  xsVals.forEach((v, i) => doc.text(xs(i + 0.5), yr[0] + 20, fmt(v)));
  ysVals.forEach((v, j) => doc.text(xr[0] - 12, ys(j + 0.5) + 4, fmt(v), 'font-size:12px', 'end'));
  doc.text((xr[0] + xr[1]) / 2, doc.frame.height - 12, 'Synthesized span [MHz]', 'font-size:13px');
  doc.title(opts.title ?? `Normalized ${metric} bound, ${layout} (rows: pulses)`);
  return { svg: doc.render(), seriesCount: cells };
}

/** Reference ring used by the bundled layouts: radius 1000 m, first BS at 90 deg. */
export function ringStations(label: string): Array<[number, number]> {
  const match = /^mono(\d+)$/.exec(label);
  if (!match) return [];
  const n = Number(match[1]);
  const out: Array<[number, number]> = [];
  for (let i = 0; i < n; i += 1) {
    const ang = Math.PI / 2 + (2 * Math.PI * i) / n;
    out.push([1000 * Math.cos(ang), 1000 * Math.sin(ang)]);
  }
  return out;
}

export function coverageMap(table: Table, opts: FigureOptions = {}): Figure {
  requireColumn(table, 'layout');
  requireColumn(table, 'x_m');
  requireColumn(table, 'y_m');
  requireColumn(table, 'crlb_pos');
  const layouts = distinct(table.rows.map((r) => r.layout)) as string[];
  const layout = opts.layout ?? layouts[0];
  const rows = table.rows.filter((r) => r.layout === layout);
  if (rows.length === 0) throw new NoRows();
  const xsVals = distinct(rows.map((r) => r.x_m as number)).sort((a, b) => a - b);
  const ysVals = distinct(rows.map((r) => r.y_m as number)).sort((a, b) => a - b);

  const lookup = new Map<string, number | null>();
  rows.forEach((r) => lookup.set(`${r.x_m}|${r.y_m}`, num(r.crlb_pos)));
  const at = (gx: number, gy: number) => lookup.get(`${gx}|${gy}`) ?? null;

  const doc = new SvgDoc();
  const { cells } = gridHeatmap(doc, xsVals, ysVals, at);
  const { x: xr, y: yr } = doc.plotRange;
  const cw = (xr[1] - xr[0]) / xsVals.length;
  const ch = (yr[0] - yr[1]) / ysVals.length;

  // threshold contour: edges between covered and uncovered cells
  const threshold = opts.threshold;
  let contourEdges = 0;
  if (threshold !== undefined) {
    const covered = (i: number, j: number): boolean => {
      if (i < 0 || j < 0 || i >= xsVals.length || j >= ysVals.length) return false;
      const v = at(xsVals[i], ysVals[j]);
      return v !== null && v < threshold;
    };
    for (let i = 0; i < xsVals.length; i += 1) {
      for (let j = 0; j < ysVals.length; j += 1) {
        if (!covered(i, j)) continue;
        const px = xr[0] + i * cw;
        const py = yr[0] - (j + 1) * ch;
        const style = 'stroke:white;stroke-width:1.5';
        if (!covered(i - 1, j)) doc.line(px, py, px, py + ch, style, 'contour');
        if (!covered(i + 1, j)) doc.line(px + cw, py, px + cw, py + ch, style, 'contour');
        if (!covered(i, j + 1)) doc.line(px, py, px + cw, py, style, 'contour');
        if (!covered(i, j - 1)) doc.line(px, py + ch, px + cw, py + ch, style, 'contour');
        contourEdges += 1;
      }
    }
  }

  const stations = opts.stations ?? ringStations(layout);
  const sx = linearScale([xsVals[0], xsVals[xsVals.length - 1]], [xr[0] + cw / 2, xr[1] - cw / 2]);
  const sy = linearScale([ysVals[0], ysVals[ysVals.length - 1]], [yr[0] - ch / 2, yr[1] + ch / 2]);
  stations.forEach(([px, py]) => {
    doc.circle(sx(px), sy(py), 5, 'fill:white;stroke:black;stroke-width:1.5', 'station');
  });

  [xsVals[0], 0, xsVals[xsVals.length - 1]].forEach((v) => doc.text(sx(v), yr[0] + 20, fmt(v)));
  [ysVals[0], 0, ysVals[ysVals.length - 1]].forEach((v) =>
    doc.text(xr[0] - 10, sy(v) + 4, fmt(v), 'font-size:12px', 'end'),
  );
  doc.text((xr[0] + xr[1]) / 2, doc.frame.height - 12, 'x [m]', 'font-size:13px');
  doc.title(
    opts.title ??
      `Position bound map, ${layout}` +
        (threshold !== undefined ? ` (contour at ${fmt(threshold)} m^2)` : ''),
  );
  void contourEdges;
  return { svg: doc.render(), seriesCount: cells + stations.length };
}

export const FIGURE_KINDS = {
  snr_lines: snrLines,
  sweep_lines: sweepLines,
  sweep_heatmap: sweepHeatmap,
  coverage_map: coverageMap,
} as const;

export type FigureKind = keyof typeof FIGURE_KINDS;

export function render(kind: FigureKind, table: Table, opts: FigureOptions = {}): Figure {
  const fn = FIGURE_KINDS[kind];
  if (!fn) {
    throw new Error(`unknown figure kind '${kind}'`);
  }
  return fn(table, opts);
}

export { SchemaMismatch, NoRows };
