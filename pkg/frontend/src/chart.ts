/** Minimal SVG line chart of read cost vs PSNR. Pure string rendering so
 * it can be unit tested without a DOM; the caller injects the markup. */

import { HistoryPoint } from "./model.js";

export interface ChartOptions {
    width: number;
    height: number;
    margin: number;
}

const DEFAULTS: ChartOptions = { width: 420, height: 260, margin: 36 };

export interface ChartPoint {
    x: number; // cumulative read cost, nt per pixel
    y: number; // PSNR in dB; lossless plotted at the top of the scale
    lossless: boolean;
    level: number;
}

/** Map history into plottable points. Lossless (null PSNR) entries sit at
 * the running maximum plus a fixed headroom so the curve stays monotone. */
export function chartPoints(history: HistoryPoint[]): ChartPoint[] {
    const finite = history
        .map((p) => p.psnr)
        .filter((v): v is number => v !== null);
    const top = finite.length ? Math.max(...finite) + 6 : 60;
    return history.map((p) => ({
        x: p.cumulativeReadCost,
        y: p.psnr === null ? top : p.psnr,
        lossless: p.psnr === null,
        level: p.level,
    }));
}

function scale(value: number, lo: number, hi: number, out0: number, out1: number): number {
    if (hi === lo) {
        return (out0 + out1) / 2;
    }
    return out0 + ((value - lo) / (hi - lo)) * (out1 - out0);
}

export function renderChart(history: HistoryPoint[], options?: Partial<ChartOptions>): string {
    const { width, height, margin } = { ...DEFAULTS, ...options };
    const points = chartPoints(history);
    const parts: string[] = [
        `<svg viewBox="0 0 ${width} ${height}" class="cost-chart" role="img">`,
        `<line class="axis" x1="${margin}" y1="${height - margin}" x2="${width - 8}" y2="${height - margin}"/>`,
        `<line class="axis" x1="${margin}" y1="${height - margin}" x2="${margin}" y2="8"/>`,
        `<text class="axis-label x" x="${width / 2}" y="${height - 6}">read cost (nt/pixel)</text>`,
        `<text class="axis-label y" x="10" y="${height / 2}" transform="rotate(-90 10 ${height / 2})">PSNR (dB)</text>`,
    ];
    if (points.length) {
        const xs = points.map((p) => p.x);
        const ys = points.map((p) => p.y);
        const xLo = Math.min(0, ...xs);
        const xHi = Math.max(...xs);
        const yLo = Math.min(...ys);
        const yHi = Math.max(...ys);
        const px = (p: ChartPoint) => scale(p.x, xLo, xHi, margin, width - 16);
        const py = (p: ChartPoint) => scale(p.y, yLo, yHi, height - margin, 16);
        const path = points
            .map((p, i) => `${i === 0 ? "M" : "L"}${px(p).toFixed(1)},${py(p).toFixed(1)}`)
            .join(" ");
        parts.push(`<path class="curve" d="${path}"/>`);
        for (const p of points) {
            const label = p.lossless ? "lossless" : `${p.y.toFixed(1)} dB`;
            parts.push(
                `<circle class="point" cx="${px(p).toFixed(1)}" cy="${py(p).toFixed(1)}" r="3">` +
                    `<title>L${p.level}: ${label}, ${p.x.toFixed(2)} nt/px</title></circle>`,
            );
        }
    }
    parts.push("</svg>");
    return parts.join("");
}
