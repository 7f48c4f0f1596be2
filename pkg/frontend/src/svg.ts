/**
 * Minimal hand-rolled SVG line charts.
 *
 * No plotting dependency: the output must be byte-identical for identical
 * inputs, so every coordinate is formatted with a fixed precision and
 * nothing (timestamps, random ids, locale) leaks into the markup.
 */

export interface Curve {
  label: string;
  x: number[];
  y: number[];
  se?: number[]; // optional error bars, drawn as +/- 1 SE whiskers
  color?: string;
  dash?: string;
}

export interface ChartOpts {
  title: string;
  subtitle?: string;
  xLabel: string;
  yLabel: string;
  curves: Curve[];
  yMin?: number; // force axis floor (e.g. 0 for latency)
}

// Fixed palette, assigned to curves in order.
const PALETTE = ["#4361ee", "#e63946", "#2d6a4f", "#f77f00", "#7209b7", "#555"];

const W = 640;
const H = 300;

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Fixed-precision coordinate: the determinism contract hinges on this. */
function fx(v: number): string {
  return v.toFixed(2);
}

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const nice = [1, 2, 5, 10].map((m) => m * mag);
  const step = nice.find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) ticks.push(v);
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1);
  if (Number.isInteger(v)) return String(v);
  return String(parseFloat(v.toPrecision(3)));
}

export function renderChart(opts: ChartOpts): string {
  const { curves } = opts;
  const ml = 62;
  const mr = 18;
  const mt = opts.subtitle ? 40 : 30;
  const mb = 44;
  const pw = W - ml - mr;
  const ph = H - mt - mb;

  // Data ranges (error bars included so whiskers never clip).
  const xs = curves.flatMap((c) => c.x);
  const yLo = curves.flatMap((c) =>
    c.y.map((v, i) => v - (c.se?.[i] ?? 0))
  );
  const yHi = curves.flatMap((c) =>
    c.y.map((v, i) => v + (c.se?.[i] ?? 0))
  );
  const finite = (v: number) => Number.isFinite(v);
  const xMin = Math.min(...xs.filter(finite));
  const xMax = Math.max(...xs.filter(finite));
  let yMin = opts.yMin ?? Math.min(...yLo.filter(finite));
  let yMax = Math.max(...yHi.filter(finite));
  if (!(yMax > yMin)) {
    yMax = yMin + 1; // flat data: give the axis some height
  }
  const pad = (yMax - yMin) * 0.06;
  if (opts.yMin === undefined) yMin -= pad;
  yMax += pad;

  const xOf = (v: number) => ml + ((v - xMin) / (xMax - xMin || 1)) * pw;
  const yOf = (v: number) => mt + ph - ((v - yMin) / (yMax - yMin || 1)) * ph;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;

  // Title block
  s += `<text x="${ml}" y="16" font-size="11" font-weight="600" fill="#222">${esc(opts.title)}</text>\n`;
  if (opts.subtitle) {
    s += `<text x="${ml}" y="28" font-size="8" fill="#888">${esc(opts.subtitle)}</text>\n`;
  }

  // Grid + y ticks
  const yTicks = niceTicks(yMin, yMax, 5);
  for (const v of yTicks) {
    const y = yOf(v);
    s += `<line x1="${ml}" y1="${fx(y)}" x2="${ml + pw}" y2="${fx(y)}" stroke="#eee" stroke-width="0.5"/>\n`;
    s += `<line x1="${ml - 3}" y1="${fx(y)}" x2="${ml}" y2="${fx(y)}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${ml - 6}" y="${fx(y + 2.5)}" text-anchor="end" font-size="7.5" fill="#555">${esc(fmtTick(v))}</text>\n`;
  }

  // x ticks
  const xTicks = niceTicks(xMin, xMax, 7);
  for (const v of xTicks) {
    const x = xOf(v);
    s += `<line x1="${fx(x)}" y1="${mt + ph}" x2="${fx(x)}" y2="${mt + ph + 3}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${fx(x)}" y="${mt + ph + 13}" text-anchor="middle" font-size="7.5" fill="#555">${esc(fmtTick(v))}</text>\n`;
  }

  // Axes frame
  s += `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<text x="${ml + pw / 2}" y="${H - 6}" text-anchor="middle" font-size="9" fill="#333">${esc(opts.xLabel)}</text>\n`;
  s += `<text x="14" y="${mt + ph / 2}" text-anchor="middle" font-size="9" fill="#333" transform="rotate(-90,14,${mt + ph / 2})">${esc(opts.yLabel)}</text>\n`;

  // Curves: error whiskers under the line, then the line, then markers.
  curves.forEach((c, ci) => {
    const color = c.color ?? PALETTE[ci % PALETTE.length];
    if (c.se) {
      for (let i = 0; i < c.x.length; i++) {
        const seV = c.se[i] ?? 0;
        if (!Number.isFinite(seV) || seV <= 0) continue;
        const x = xOf(c.x[i] as number);
        const yA = yOf((c.y[i] as number) - seV);
        const yB = yOf((c.y[i] as number) + seV);
        s += `<line x1="${fx(x)}" y1="${fx(yA)}" x2="${fx(x)}" y2="${fx(yB)}" stroke="${color}" stroke-width="0.7" opacity="0.55"/>\n`;
        s += `<line x1="${fx(x - 2.2)}" y1="${fx(yA)}" x2="${fx(x + 2.2)}" y2="${fx(yA)}" stroke="${color}" stroke-width="0.7" opacity="0.55"/>\n`;
        s += `<line x1="${fx(x - 2.2)}" y1="${fx(yB)}" x2="${fx(x + 2.2)}" y2="${fx(yB)}" stroke="${color}" stroke-width="0.7" opacity="0.55"/>\n`;
      }
    }
    const pts = c.x
      .map((xv, i) => `${fx(xOf(xv))},${fx(yOf(c.y[i] as number))}`)
      .join(" ");
    s += `<polyline fill="none" stroke="${color}" stroke-width="1.3" ${c.dash ? `stroke-dasharray="${c.dash}" ` : ""}points="${pts}"/>\n`;
    for (let i = 0; i < c.x.length; i++) {
      s += `<circle cx="${fx(xOf(c.x[i] as number))}" cy="${fx(yOf(c.y[i] as number))}" r="1.8" fill="${color}"/>\n`;
    }
  });

  // Legend (top-right, translucent box)
  const legendW = Math.max(...curves.map((c) => c.label.length)) * 4.8 + 28;
  const lx = ml + pw - legendW - 4;
  const ly = mt + 6;
  s += `<rect x="${fx(lx)}" y="${ly - 5}" width="${fx(legendW + 8)}" height="${curves.length * 12 + 4}" rx="2" fill="white" fill-opacity="0.85" stroke="#ddd" stroke-width="0.5"/>\n`;
  curves.forEach((c, ci) => {
    const color = c.color ?? PALETTE[ci % PALETTE.length];
    const yy = ly + ci * 12 + 2;
    s += `<line x1="${fx(lx + 4)}" y1="${yy}" x2="${fx(lx + 18)}" y2="${yy}" stroke="${color}" stroke-width="1.3" ${c.dash ? `stroke-dasharray="${c.dash}" ` : ""}/>\n`;
    s += `<text x="${fx(lx + 22)}" y="${yy + 2.5}" font-size="7.5" fill="#444">${esc(c.label)}</text>\n`;
  });

  s += `</svg>\n`;
  return s;
}
