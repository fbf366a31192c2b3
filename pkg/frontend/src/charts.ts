/** Minimal SVG line charts from server-provided grids.
 *
 * The client never recomputes any curve: it only scales the numbers the
 * service returned into pixel coordinates.
 */

export interface Series {
  label: string;
  values: (number | null)[];
  color: string;
}

const WIDTH = 320;
const HEIGHT = 180;
const PAD = { left: 44, right: 10, top: 12, bottom: 26 };

function finiteValues(series: Series[]): number[] {
  const out: number[] = [];
  for (const s of series) {
    for (const v of s.values) if (v !== null && Number.isFinite(v)) out.push(v);
  }
  return out;
}

export function pathFor(
  grid: number[],
  values: (number | null)[],
  xmin: number, xmax: number, ymin: number, ymax: number,
): string {
  const sx = (x: number) =>
    PAD.left + ((x - xmin) / (xmax - xmin || 1)) * (WIDTH - PAD.left - PAD.right);
  const sy = (y: number) =>
    HEIGHT - PAD.bottom - ((y - ymin) / (ymax - ymin || 1)) * (HEIGHT - PAD.top - PAD.bottom);
  let d = "";
  let pen = false;
  for (let i = 0; i < grid.length; i++) {
    const v = values[i];
    if (v === null || !Number.isFinite(v)) {
      pen = false; // lift the pen across infinite/undefined stretches
      continue;
    }
    d += `${pen ? "L" : "M"}${sx(grid[i]).toFixed(2)},${sy(v).toFixed(2)}`;
    pen = true;
  }
  return d;
}

export function lineChart(title: string, grid: number[], series: Series[],
                          yLabel = ""): string {
  const finite = finiteValues(series);
  const ymin = Math.min(0, ...finite);
  const ymax = finite.length ? Math.max(...finite) * 1.05 || 1 : 1;
  const xmin = grid[0] ?? 0;
  const xmax = grid[grid.length - 1] ?? 1;
  const paths = series
    .map((s) =>
      `<path d="${pathFor(grid, s.values, xmin, xmax, ymin, ymax)}" ` +
      `fill="none" stroke="${s.color}" stroke-width="1.8"/>`)
    .join("");
  const legend = series
    .map((s, i) =>
      `<text x="${PAD.left + 4}" y="${PAD.top + 12 + 14 * i}" fill="${s.color}" ` +
      `font-size="10">${s.label}</text>`)
    .join("");
  const xticks = [xmin, (xmin + xmax) / 2, xmax]
    .map((x) => {
      const px = PAD.left + ((x - xmin) / (xmax - xmin || 1)) * (WIDTH - PAD.left - PAD.right);
      return `<text x="${px}" y="${HEIGHT - 8}" text-anchor="middle" font-size="9" fill="#555">${trim(x)}</text>`;
    })
    .join("");
  const yticks = [ymin, ymax]
    .map((y) => {
      const py = HEIGHT - PAD.bottom -
        ((y - ymin) / (ymax - ymin || 1)) * (HEIGHT - PAD.top - PAD.bottom);
      return `<text x="${PAD.left - 6}" y="${py + 3}" text-anchor="end" font-size="9" fill="#555">${trim(y)}</text>`;
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="${title}">` +
    `<text x="${WIDTH / 2}" y="10" text-anchor="middle" font-size="11">${title}</text>` +
    `<line x1="${PAD.left}" y1="${HEIGHT - PAD.bottom}" x2="${WIDTH - PAD.right}" ` +
    `y2="${HEIGHT - PAD.bottom}" stroke="#999"/>` +
    `<line x1="${PAD.left}" y1="${PAD.top}" x2="${PAD.left}" ` +
    `y2="${HEIGHT - PAD.bottom}" stroke="#999"/>` +
    (yLabel
      ? `<text x="12" y="${HEIGHT / 2}" font-size="9" fill="#555" ` +
        `transform="rotate(-90 12 ${HEIGHT / 2})" text-anchor="middle">${yLabel}</text>`
      : "") +
    xticks + yticks + paths + legend +
    `</svg>`
  );
}

export function trim(x: number): string {
  if (x === 0) return "0";
  const abs = Math.abs(x);
  if (abs >= 1000 || abs < 0.001) return x.toExponential(1);
  return String(Number(x.toPrecision(3)));
}
