/** Minimal SVG figure assembly: linear scales, ticks, stacked panels. */

export interface Series {
    xs: number[];
    ys: number[];
    color: string;
    label?: string;
    dash?: boolean;
}

export interface HLine {
    y: number;
    color: string;
    label?: string;
}

export interface Panel {
    title?: string;
    xLabel: string;
    yLabel: string;
    series: Series[];
    hlines?: HLine[];
    /** Force these values into the y-domain (e.g. zero, or a bound). */
    yInclude?: number[];
}

const WIDTH = 720;
const PANEL_HEIGHT = 300;
const MARGIN = { left: 64, right: 16, top: 34, bottom: 44 };
const GAP = 18;

function finite(values: number[]): number[] {
    return values.filter(Number.isFinite);
}

function extent(values: number[]): [number, number] {
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of values) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    if (!Number.isFinite(lo)) return [0, 1];
    if (lo === hi) return [lo - 1, hi + 1];
    return [lo, hi];
}

/** Tick positions on a 1-2-5 progression covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, count = 6): number[] {
    const span = hi - lo;
    const raw = span / Math.max(count - 1, 1);
    const power = Math.pow(10, Math.floor(Math.log10(raw)));
    let step = power;
    for (const mult of [1, 2, 5, 10]) {
        step = mult * power;
        if (step >= raw) break;
    }
    const ticks: number[] = [];
    for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
        ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
    }
    return ticks;
}

function formatTick(value: number): string {
    if (value === 0) return "0";
    const magnitude = Math.abs(value);
    if (magnitude >= 1000 || magnitude < 0.001) return value.toExponential(1);
    return parseFloat(value.toPrecision(4)).toString();
}

function scale(domain: [number, number], range: [number, number]) {
    const k = (range[1] - range[0]) / (domain[1] - domain[0]);
    return (v: number) => range[0] + (v - domain[0]) * k;
}

function escapeText(text: string): string {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderPanel(panel: Panel, yOffset: number): string {
    const innerW = WIDTH - MARGIN.left - MARGIN.right;
    const innerH = PANEL_HEIGHT - MARGIN.top - MARGIN.bottom;
    const xValues = panel.series.flatMap((s) => finite(s.xs));
    const yValues = panel.series.flatMap((s) => finite(s.ys));
    for (const line of panel.hlines ?? []) yValues.push(line.y);
    for (const v of panel.yInclude ?? []) yValues.push(v);
    const [xLo, xHi] = extent(xValues);
    let [yLo, yHi] = extent(yValues);
    const pad = (yHi - yLo) * 0.06;
    yLo -= pad;
    yHi += pad;
    const sx = scale([xLo, xHi], [MARGIN.left, MARGIN.left + innerW]);
    const sy = scale([yLo, yHi], [MARGIN.top + innerH, MARGIN.top]);

    const parts: string[] = [];
    parts.push(`<g class="panel" transform="translate(0,${yOffset})">`);
    if (panel.title) {
        parts.push(
            `<text x="${MARGIN.left}" y="${MARGIN.top - 12}" font-size="13" font-weight="bold">` +
                `${escapeText(panel.title)}</text>`,
        );
    }

    // frame and ticks
    parts.push(
        `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${innerW}" height="${innerH}" ` +
            `fill="none" stroke="#444"/>`,
    );
    for (const tick of niceTicks(xLo, xHi)) {
        const px = sx(tick).toFixed(2);
        parts.push(`<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${MARGIN.top + innerH}" stroke="#ddd"/>`);
        parts.push(
            `<text x="${px}" y="${MARGIN.top + innerH + 16}" font-size="11" text-anchor="middle">` +
                `${formatTick(tick)}</text>`,
        );
    }
    for (const tick of niceTicks(yLo, yHi)) {
        const py = sy(tick).toFixed(2);
        parts.push(`<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + innerW}" y2="${py}" stroke="#ddd"/>`);
        parts.push(
            `<text x="${MARGIN.left - 6}" y="${py}" font-size="11" text-anchor="end" ` +
                `dominant-baseline="middle">${formatTick(tick)}</text>`,
        );
    }
    parts.push(
        `<text x="${MARGIN.left + innerW / 2}" y="${PANEL_HEIGHT - 10}" font-size="12" ` +
            `text-anchor="middle">${escapeText(panel.xLabel)}</text>`,
    );
    parts.push(
        `<text x="16" y="${MARGIN.top + innerH / 2}" font-size="12" text-anchor="middle" ` +
            `transform="rotate(-90 16 ${MARGIN.top + innerH / 2})">${escapeText(panel.yLabel)}</text>`,
    );

    for (const line of panel.hlines ?? []) {
        const py = sy(line.y).toFixed(2);
        parts.push(
            `<line class="bound" x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + innerW}" y2="${py}" ` +
                `stroke="${line.color}" stroke-width="1.5" stroke-dasharray="7 4"/>`,
        );
    }
    for (const series of panel.series) {
        const points: string[] = [];
        for (let i = 0; i < series.xs.length; i++) {
            const x = series.xs[i];
            const y = series.ys[i];
            if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
            points.push(`${sx(x).toFixed(2)},${sy(y).toFixed(2)}`);
        }
        const dash = series.dash ? ` stroke-dasharray="5 4"` : "";
        const label = series.label ? ` data-label="${escapeText(series.label)}"` : "";
        parts.push(
            `<polyline class="trace"${label} fill="none" stroke="${series.color}" ` +
                `stroke-width="1.5"${dash} points="${points.join(" ")}"/>`,
        );
    }

    // legend, top-right inside the frame
    const entries: { color: string; label: string; dash: boolean }[] = [];
    for (const s of panel.series) {
        if (s.label) entries.push({ color: s.color, label: s.label, dash: s.dash ?? false });
    }
    for (const line of panel.hlines ?? []) {
        if (line.label) entries.push({ color: line.color, label: line.label, dash: true });
    }
    if (entries.length > 0) {
        const lx = MARGIN.left + innerW - 150;
        let ly = MARGIN.top + 10;
        parts.push(
            `<rect x="${lx - 8}" y="${ly - 8}" width="152" height="${entries.length * 16 + 12}" ` +
                `fill="white" fill-opacity="0.85" stroke="#999"/>`,
        );
        for (const entry of entries) {
            const dash = entry.dash ? ` stroke-dasharray="5 4"` : "";
            parts.push(
                `<line x1="${lx}" y1="${ly + 4}" x2="${lx + 22}" y2="${ly + 4}" ` +
                    `stroke="${entry.color}" stroke-width="1.5"${dash}/>`,
            );
            parts.push(
                `<text x="${lx + 28}" y="${ly + 8}" font-size="11">${escapeText(entry.label)}</text>`,
            );
            ly += 16;
        }
    }
    parts.push(`</g>`);
    return parts.join("\n");
}

export function renderFigure(panels: Panel[]): string {
    const height = panels.length * PANEL_HEIGHT + (panels.length - 1) * GAP;
    const body = panels
        .map((panel, i) => renderPanel(panel, i * (PANEL_HEIGHT + GAP)))
        .join("\n");
    return (
        `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" ` +
            `viewBox="0 0 ${WIDTH} ${height}" font-family="sans-serif">\n` +
        `<rect width="${WIDTH}" height="${height}" fill="white"/>\n` +
        `${body}\n</svg>\n`
    );
}
