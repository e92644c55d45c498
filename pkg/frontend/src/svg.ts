/** Minimal SVG scaffolding: scales, axes, and shape emitters. */

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 720,
  height: 520,
  margin: { top: 48, right: 32, bottom: 56, left: 72 },
};

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const inner = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const fn = ((v: number) => inner(Math.log10(v))) as Scale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

export function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const scaled = step * (err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1);
  const start = Math.ceil(lo / scaled) * scaled;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += scaled) out.push(v);
  return out;
}

export function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); e <= Math.floor(Math.log10(hi)); e += 1) {
    out.push(Math.pow(10, e));
  }
  return out.length >= 2 ? out : [lo, hi];
}

const esc = (s: string) => s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');

export function fmt(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return `${Number(v.toPrecision(4))}`;
}

export const SERIES_COLORS = ['#1f6fb2', '#d1495b', '#3a7d44', '#8d6b94', '#c77d2e', '#4a4e69'];

export class SvgDoc {
  private parts: string[] = [];
  constructor(readonly frame: Frame = DEFAULT_FRAME) {}

  get plotRange(): { x: [number, number]; y: [number, number] } {
    const { width, height, margin } = this.frame;
    return {
      x: [margin.left, width - margin.right],
      y: [height - margin.bottom, margin.top],
    };
  }

  add(part: string): void {
    this.parts.push(part);
  }

  line(x1: number, y1: number, x2: number, y2: number, style: string, cls = ''): void {
    this.add(
      `<line class="${cls}" x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" ` +
        `x2="${x2.toFixed(2)}" y2="${y2.toFixed(2)}" style="${style}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, color: string, cls = 'series'): void {
    const path = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(' ');
    this.add(
      `<polyline class="${cls}" points="${path}" ` +
        `style="fill:none;stroke:${color};stroke-width:2"/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string, cls = ''): void {
    this.add(
      `<rect class="${cls}" x="${x.toFixed(2)}" y="${y.toFixed(2)}" ` +
        `width="${w.toFixed(2)}" height="${h.toFixed(2)}" style="fill:${fill}"/>`,
    );
  }

  circle(cx: number, cy: number, r: number, style: string, cls = ''): void {
    this.add(
      `<circle class="${cls}" cx="${cx.toFixed(2)}" cy="${cy.toFixed(2)}" r="${r}" style="${style}"/>`,
    );
  }

  text(x: number, y: number, content: string, style = 'font-size:12px', anchor = 'middle'): void {
    this.add(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" text-anchor="${anchor}" ` +
        `style="font-family:sans-serif;${style}">${esc(content)}</text>`,
    );
  }

  xAxis(scale: Scale, values: number[], label: string): void {
    const { x, y } = this.plotRange;
    this.line(x[0], y[0], x[1], y[0], 'stroke:#222;stroke-width:1');
    for (const v of values) {
      const px = scale(v);
      this.line(px, y[0], px, y[0] + 5, 'stroke:#222;stroke-width:1');
      this.text(px, y[0] + 20, fmt(v));
    }
    this.text((x[0] + x[1]) / 2, this.frame.height - 12, label, 'font-size:13px');
  }

  yAxis(scale: Scale, values: number[], label: string): void {
    const { x, y } = this.plotRange;
    this.line(x[0], y[0], x[0], y[1], 'stroke:#222;stroke-width:1');
    for (const v of values) {
      const py = scale(v);
      this.line(x[0] - 5, py, x[0], py, 'stroke:#222;stroke-width:1');
      this.text(x[0] - 8, py + 4, fmt(v), 'font-size:12px', 'end');
    }
    this.add(
      `<text x="16" y="${(y[0] + y[1]) / 2}" text-anchor="middle" ` +
        `transform="rotate(-90 16 ${(y[0] + y[1]) / 2})" ` +
        `style="font-family:sans-serif;font-size:13px">${esc(label)}</text>`,
    );
  }

  title(content: string): void {
    this.text(this.frame.width / 2, 24, content, 'font-size:15px;font-weight:bold');
  }

  legend(entries: Array<{ label: string; color: string }>): void {
    const { x, y } = this.plotRange;
    entries.forEach(({ label, color }, i) => {
      const ly = y[1] + 14 + i * 18;
      this.line(x[1] - 150, ly, x[1] - 126, ly, `stroke:${color};stroke-width:2`);
      this.text(x[1] - 120, ly + 4, label, 'font-size:12px', 'start');
    });
  }

  render(): string {
    const { width, height } = this.frame;
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">\n<rect width="${width}" height="${height}" ` +
      `style="fill:white"/>\n${this.parts.join('\n')}\n</svg>\n`
    );
  }
}

/** Two-stop-per-segment color ramp over normalized [0, 1] (dark = small). */
export function heatColor(t: number): string {
  const stops: Array<[number, [number, number, number]]> = [
    [0.0, [13, 8, 135]],
    [0.35, [126, 3, 168]],
    [0.7, [225, 100, 98]],
    [1.0, [240, 249, 33]],
  ];
  const clamped = Math.min(1, Math.max(0, t));
  for (let i = 1; i < stops.length; i += 1) {
    const [t1, c1] = stops[i];
    const [t0, c0] = stops[i - 1];
    if (clamped <= t1) {
      const u = (clamped - t0) / (t1 - t0);
      const mix = c0.map((a, k) => Math.round(a + u * (c1[k] - a)));
      return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
    }
  }
  return 'rgb(240,249,33)';
}
