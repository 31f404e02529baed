import { CurveFile, readCurveFile } from './csv';

export interface PlotJob {
  csvPaths: string[];
  labels: string[];
  outputPath: string;
  title: string;
  panels: boolean;
}

export interface Series {
  label: string;
  kind: 'theory' | 'mc';
  x: number[];
  y: number[];
  // untouched source tokens; these go into the SVG so plotted data can be
  // read back exactly
  xText: string[];
  yText: string[];
}

const WIDTH = 840;
const PANEL_HEIGHT = 420;
const MARGIN = { left: 64, right: 16, top: 40, bottom: 48 };
const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e',
                '#8c564b', '#e377c2', '#17becf'];

function escapeXml(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;')
          .replace(/>/g, '&gt;').replace(/"/g, '&quot;');
}

export function seriesFromCurve(curve: CurveFile, label: string): Series[] {
  const out: Series[] = [];
  if (curve.theoryDb.some(Number.isFinite)) {
    out.push({ label: `${label} theory`, kind: 'theory', x: curve.n,
               y: curve.theoryDb, xText: curve.nText,
               yText: curve.theoryDbText });
  }
  if (curve.mcDb.some(Number.isFinite)) {
    out.push({ label: `${label} mc`, kind: 'mc', x: curve.n, y: curve.mcDb,
               xText: curve.nText, yText: curve.mcDbText });
  }
  if (out.length === 0) {
    throw new Error(`${curve.path}: no plottable series (all values nan)`);
  }
  return out;
}

function finiteRange(values: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of values) {
    for (const v of arr) {
      if (!Number.isFinite(v)) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo > hi) throw new Error('no finite values to plot');
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

// tick positions at a nice decimal step, about `want` of them
export function ticks(lo: number, hi: number, want = 6): number[] {
  const span = hi - lo;
  const raw = span / Math.max(1, want);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) { step = m * mag; break; }
  }
  const out: number[] = [];
  for (let k = Math.ceil(lo / step); k * step <= hi + step * 1e-9; k++) {
    out.push(Number((k * step).toPrecision(12)));
  }
  return out;
}

interface Geometry {
  x0: number; y0: number; w: number; h: number;
  xlo: number; xhi: number; ylo: number; yhi: number;
}

function sx(g: Geometry, v: number): number {
  return g.x0 + ((v - g.xlo) / (g.xhi - g.xlo)) * g.w;
}

function sy(g: Geometry, v: number): number {
  return g.y0 + g.h - ((v - g.ylo) / (g.yhi - g.ylo)) * g.h;
}

function fmt(v: number): string {
  return Number(v.toPrecision(6)).toString();
}

function polylineSegments(s: Series, g: Geometry): string[] {
  const segs: string[] = [];
  let points: string[] = [];
  for (let i = 0; i < s.x.length; i++) {
    if (Number.isFinite(s.x[i]) && Number.isFinite(s.y[i])) {
      points.push(`${fmt(sx(g, s.x[i]))},${fmt(sy(g, s.y[i]))}`);
    } else if (points.length > 0) {
      segs.push(points.join(' '));
      points = [];
    }
  }
  if (points.length > 0) segs.push(points.join(' '));
  return segs;
}

function renderSeries(s: Series, g: Geometry, color: string): string {
  const parts: string[] = [];
  parts.push(`<g class="series" data-label="${escapeXml(s.label)}" ` +
             `data-kind="${s.kind}" data-x="${s.xText.join(' ')}" ` +
             `data-y="${s.yText.join(' ')}">`);
  const dash = s.kind === 'mc' ? ' stroke-dasharray="4 3"' : '';
  for (const seg of polylineSegments(s, g)) {
    parts.push(`<polyline fill="none" stroke="${color}" stroke-width="1.4"` +
               `${dash} points="${seg}"/>`);
  }
  if (s.kind === 'mc') {
    // markers on a subsample; the data attributes carry every point
    const stride = Math.max(1, Math.floor(s.x.length / 60));
    for (let i = 0; i < s.x.length; i += stride) {
      if (!Number.isFinite(s.x[i]) || !Number.isFinite(s.y[i])) continue;
      parts.push(`<circle cx="${fmt(sx(g, s.x[i]))}" ` +
                 `cy="${fmt(sy(g, s.y[i]))}" r="2.2" fill="${color}"/>`);
    }
  }
  parts.push('</g>');
  return parts.join('\n');
}

function renderPanel(seriesList: Series[], top: number,
                     panelTitle: string): string {
  const g: Geometry = {
    x0: MARGIN.left, y0: top + MARGIN.top,
    w: WIDTH - MARGIN.left - MARGIN.right,
    h: PANEL_HEIGHT - MARGIN.top - MARGIN.bottom,
    xlo: 0, xhi: 1, ylo: 0, yhi: 1,
  };
  [g.xlo, g.xhi] = finiteRange(seriesList.map((s) => s.x));
  const [ylo, yhi] = finiteRange(seriesList.map((s) => s.y));
  const pad = 0.05 * (yhi - ylo);
  g.ylo = ylo - pad;
  g.yhi = yhi + pad;

  const parts: string[] = [];
  parts.push(`<g class="panel">`);
  parts.push(`<rect x="${g.x0}" y="${g.y0}" width="${g.w}" height="${g.h}" ` +
             `fill="white" stroke="#333" stroke-width="1"/>`);
  if (panelTitle) {
    parts.push(`<text x="${g.x0 + g.w / 2}" y="${g.y0 - 8}" ` +
               `text-anchor="middle" font-size="13">` +
               `${escapeXml(panelTitle)}</text>`);
  }
  for (const t of ticks(g.xlo, g.xhi)) {
    const px = fmt(sx(g, t));
    parts.push(`<line x1="${px}" y1="${fmt(g.y0 + g.h)}" x2="${px}" ` +
               `y2="${fmt(g.y0 + g.h + 5)}" stroke="#333"/>`);
    parts.push(`<text x="${px}" y="${fmt(g.y0 + g.h + 18)}" ` +
               `text-anchor="middle" font-size="11">${fmt(t)}</text>`);
  }
  for (const t of ticks(g.ylo, g.yhi)) {
    const py = fmt(sy(g, t));
    parts.push(`<line x1="${g.x0 - 5}" y1="${py}" x2="${g.x0}" y2="${py}" ` +
               `stroke="#333"/>`);
    parts.push(`<text x="${g.x0 - 8}" y="${py}" text-anchor="end" ` +
               `dominant-baseline="middle" font-size="11">${fmt(t)}</text>`);
    parts.push(`<line x1="${g.x0}" y1="${py}" x2="${g.x0 + g.w}" ` +
               `y2="${py}" stroke="#ddd" stroke-width="0.5"/>`);
  }
  parts.push(`<text class="xlabel" x="${g.x0 + g.w / 2}" ` +
             `y="${g.y0 + g.h + 36}" text-anchor="middle" ` +
             `font-size="12">iteration</text>`);
  parts.push(`<text class="ylabel" x="14" y="${g.y0 + g.h / 2}" ` +
             `text-anchor="middle" font-size="12" transform="rotate(-90 14 ` +
             `${g.y0 + g.h / 2})">MSD (dB)</text>`);

  seriesList.forEach((s, i) => {
    parts.push(renderSeries(s, g, COLORS[i % COLORS.length]));
  });

  // legend, top right corner of the panel
  seriesList.forEach((s, i) => {
    const lx = g.x0 + g.w - 180;
    const ly = g.y0 + 16 + 16 * i;
    const color = COLORS[i % COLORS.length];
    const dash = s.kind === 'mc' ? ' stroke-dasharray="4 3"' : '';
    parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" ` +
               `stroke="${color}" stroke-width="1.4"${dash}/>`);
    parts.push(`<text class="legend" x="${lx + 32}" y="${ly + 4}" ` +
               `font-size="11">${escapeXml(s.label)}</text>`);
  });
  parts.push('</g>');
  return parts.join('\n');
}

export function render(job: PlotJob): string {
  if (job.csvPaths.length === 0) {
    throw new Error('need at least one csv path');
  }
  if (job.labels.length !== job.csvPaths.length) {
    throw new Error(`got ${job.labels.length} labels for ` +
                    `${job.csvPaths.length} csv files`);
  }
  const curves = job.csvPaths.map(readCurveFile);

  const panels: { series: Series[]; title: string }[] = [];
  if (job.panels) {
    curves.forEach((curve, i) => {
      panels.push({ series: seriesFromCurve(curve, job.labels[i]),
                    title: job.labels[i] });
    });
  } else {
    const all: Series[] = [];
    curves.forEach((curve, i) => {
      all.push(...seriesFromCurve(curve, job.labels[i]));
    });
    panels.push({ series: all, title: '' });
  }

  const height = panels.length * PANEL_HEIGHT + (job.title ? 24 : 0);
  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
             `height="${height}" viewBox="0 0 ${WIDTH} ${height}" ` +
             `font-family="sans-serif">`);
  parts.push(`<rect width="100%" height="100%" fill="white"/>`);
  let top = 0;
  if (job.title) {
    parts.push(`<text x="${WIDTH / 2}" y="18" text-anchor="middle" ` +
               `font-size="15">${escapeXml(job.title)}</text>`);
    top = 24;
  }
  for (const panel of panels) {
    parts.push(renderPanel(panel.series, top, panel.title));
    top += PANEL_HEIGHT;
  }
  parts.push('</svg>');
  return parts.join('\n') + '\n';
}

// Read the plotted data back out of a rendered SVG. Inverse of the series
// embedding in renderSeries; tests use it to check the round trip.
export function extractSeries(svg: string):
    { label: string; kind: string; x: string[]; y: string[] }[] {
  const out: { label: string; kind: string; x: string[]; y: string[] }[] = [];
  const re = /<g class="series" data-label="([^"]*)" data-kind="([^"]*)" data-x="([^"]*)" data-y="([^"]*)">/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(svg)) !== null) {
    out.push({ label: m[1], kind: m[2],
               x: m[3].split(' '), y: m[4].split(' ') });
  }
  return out;
}
