// Hand-rolled SVG chart primitives: pure path-building functions (unit
// tested) plus a tiny render helper for the live loss/incumbent chart.

export interface Extent {
  min: number;
  max: number;
}

export function extent(values: number[], padFraction = 0.05): Extent {
  if (values.length === 0) return { min: 0, max: 1 };
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const pad = (max - min) * padFraction;
  return { min: min - pad, max: max + pad };
}

export function scale(domain: Extent, range: [number, number]): (v: number) => number {
  const span = domain.max - domain.min;
  return (v) => range[0] + ((v - domain.min) / span) * (range[1] - range[0]);
}

export function linePath(xs: number[], ys: number[], sx: (v: number) => number, sy: (v: number) => number): string {
  if (xs.length === 0) return "";
  const parts = xs.map((x, i) => `${i === 0 ? "M" : "L"}${sx(x).toFixed(1)},${sy(ys[i]).toFixed(1)}`);
  return parts.join("");
}

export interface LossChartInput {
  iterations: number[];
  losses: number[];
  incumbent: number[];
  priorMarkers: number[];
  width: number;
  height: number;
}

const MARGIN = { top: 10, right: 10, bottom: 22, left: 46 };

export function renderLossChart(el: Element, input: LossChartInput): void {
  const { width, height } = input;
  const innerW: [number, number] = [MARGIN.left, width - MARGIN.right];
  const innerH: [number, number] = [height - MARGIN.bottom, MARGIN.top];
  const xDomain = extent(input.iterations.length ? input.iterations : [0, 1], 0);
  const yDomain = extent([...input.losses, ...input.incumbent]);
  const sx = scale(xDomain, innerW);
  const sy = scale(yDomain, innerH);

  const dots = input.iterations
    .map((it, i) => `<circle cx="${sx(it).toFixed(1)}" cy="${sy(input.losses[i]).toFixed(1)}" r="2.2" class="dot"/>`)
    .join("");
  const incumbentPath = linePath(input.iterations, input.incumbent, sx, sy);
  const markers = input.priorMarkers
    .map((it) => `<line x1="${sx(it).toFixed(1)}" x2="${sx(it).toFixed(1)}" y1="${innerH[1]}" y2="${innerH[0]}" class="marker"/>`)
    .join("");
  const yTicks = [yDomain.min, (yDomain.min + yDomain.max) / 2, yDomain.max]
    .map((v) => `<text x="${MARGIN.left - 6}" y="${sy(v).toFixed(1)}" class="tick" text-anchor="end" dominant-baseline="middle">${v.toPrecision(3)}</text>`)
    .join("");
  const xMax = Math.max(1, ...input.iterations);
  el.innerHTML = `
<svg viewBox="0 0 ${width} ${height}" preserveAspectRatio="none">
  <rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW[1] - innerW[0]}" height="${innerH[0] - innerH[1]}" class="plot-bg"/>
  ${markers}${dots}
  <path d="${incumbentPath}" class="incumbent-line" fill="none"/>
  ${yTicks}
  <text x="${innerW[1]}" y="${height - 6}" class="tick" text-anchor="end">trial ${xMax}</text>
</svg>`;
}

export interface SliceChartInput {
  xs: number[];
  mean: number[];
  std: number[];
  width: number;
  height: number;
  logX: boolean;
}

export function renderSliceChart(el: Element, input: SliceChartInput): void {
  const { width, height } = input;
  const xsT = input.logX ? input.xs.map((v) => Math.log(v)) : input.xs;
  const sx = scale(extent(xsT, 0), [MARGIN.left, width - MARGIN.right]);
  const lo = input.mean.map((m, i) => m - input.std[i]);
  const hi = input.mean.map((m, i) => m + input.std[i]);
  const sy = scale(extent([...lo, ...hi]), [height - MARGIN.bottom, MARGIN.top]);
  const band =
    linePath(xsT, hi, sx, sy) +
    linePath([...xsT].reverse(), [...lo].reverse(), sx, sy).replace(/^M/, "L") +
    "Z";
  el.innerHTML = `
<svg viewBox="0 0 ${width} ${height}" preserveAspectRatio="none">
  <path d="${band}" class="band"/>
  <path d="${linePath(xsT, input.mean, sx, sy)}" class="mean-line" fill="none"/>
</svg>`;
}
