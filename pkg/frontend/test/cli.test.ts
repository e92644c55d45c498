import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import { describe, expect, it } from 'vitest';

import { main, parseArgs, thresholdFromManifest } from '../src/cli';

const fixtures = path.join(__dirname, '..', 'fixtures');
const tmp = () => fs.mkdtempSync(path.join(os.tmpdir(), 'plots-'));

describe('argument parsing', () => {
  it('requires a known kind and both paths', () => {
    expect(() => parseArgs([])).toThrowError(/usage/);
    expect(() => parseArgs(['nope', '--csv', 'a', '--out', 'b'])).toThrowError(/unknown/);
    expect(() => parseArgs(['snr_lines', '--csv', 'a'])).toThrowError(/--out/);
    const args = parseArgs(['snr_lines', '--csv', 'a.csv', '--out', 'b.svg', '--metric', 'vel']);
    expect(args.options.metric).toBe('vel');
  });
});

describe('manifest threshold', () => {
  it('reads the coverage threshold from a run manifest', () => {
    const value = thresholdFromManifest(path.join(fixtures, 'run_manifest.txt'));
    expect(value).toBeCloseTo(2e-5, 10);
  });
});

describe('end to end', () => {
  it('writes an SVG for every kind', () => {
    const out = tmp();
    const cases: Array<[string, string]> = [
      ['snr_lines', 'mse_vs_snr.csv'],
      ['sweep_lines', 'crlb_sweep.csv'],
      ['sweep_heatmap', 'crlb_sweep_joint.csv'],
      ['coverage_map', 'heatmap.csv'],
    ];
    for (const [kind, file] of cases) {
      const target = path.join(out, `${kind}.svg`);
      const code = main([
        kind,
        '--csv',
        path.join(fixtures, file),
        '--out',
        target,
        '--manifest',
        path.join(fixtures, 'run_manifest.txt'),
      ]);
      expect(code).toBe(0);
      expect(fs.existsSync(target)).toBe(true);
      expect(fs.readFileSync(target, 'utf-8')).toContain('</svg>');
    }
  });

  it('re-rendering is byte identical', () => {
    const out = tmp();
    const a = path.join(out, 'a.svg');
    const b = path.join(out, 'b.svg');
    const csv = path.join(fixtures, 'mse_vs_snr.csv');
    expect(main(['snr_lines', '--csv', csv, '--out', a])).toBe(0);
    expect(main(['snr_lines', '--csv', csv, '--out', b])).toBe(0);
    expect(fs.readFileSync(a)).toEqual(fs.readFileSync(b));
  });

  it('header-only CSV exits with an error and writes nothing', () => {
    const out = tmp();
    const empty = path.join(out, 'empty.csv');
    const header = fs
      .readFileSync(path.join(fixtures, 'mse_vs_snr.csv'), 'utf-8')
      .split('\n')[0];
    fs.writeFileSync(empty, `${header}\n`);
    const target = path.join(out, 'fig.svg');
    const code = main(['snr_lines', '--csv', empty, '--out', target]);
    expect(code).toBe(1);
    expect(fs.existsSync(target)).toBe(false);
  });

  it('missing column exits with SchemaMismatch naming it', () => {
    const out = tmp();
    const bad = path.join(out, 'bad.csv');
    fs.writeFileSync(bad, 'a,b\n1,2\n');
    const code = main(['snr_lines', '--csv', bad, '--out', path.join(out, 'x.svg')]);
    expect(code).toBe(1);
  });
});
