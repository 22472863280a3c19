/**
 * The three figure kinds an episode log supports.
 *
 * axis_tracking: end-effector position against its reference, one panel
 * per axis.  containment: workspace deviation against the allowed radius.
 * clearance: per-point wall distance against the shared safety margin.
 * Logs are overlaid in input order; bounds are drawn dashed in red and
 * must agree across inputs.  Rendering never writes to its inputs.
 */

import { writeFileSync } from "node:fs";
import { basename } from "node:path";

import {
    Episode,
    SchemaError,
    clearanceColumns,
    column,
    hasColumn,
    loadEpisode,
} from "./episode.js";
import { Panel, Series, renderFigure } from "./svg.js";

export type PlotKind = "axis_tracking" | "containment" | "clearance";

export const PLOT_KINDS: PlotKind[] = ["axis_tracking", "containment", "clearance"];

export interface PlotJob {
    kind: PlotKind;
    inputs: string[]; // episode CSV paths, overlaid in order
    output: string; // figure path, written as SVG
}

export const PALETTE = {
    green: "#2ca02c",
    blue: "#1f77b4",
    orange: "#ff7f0e",
    red: "#d62728",
};

// red is reserved for bounds and references
const SERIES_COLORS = [PALETTE.green, PALETTE.blue, PALETTE.orange];

interface Loaded {
    episode: Episode;
    label: string;
    color: string;
}

function sharedBound(loaded: Loaded[], name: string): number {
    const bounds = loaded.map(({ episode }) => column(episode, name)[0]);
    for (const b of bounds) {
        if (b !== bounds[0]) {
            throw new Error(`inputs disagree on ${name}: ${bounds.join(", ")}`);
        }
    }
    return bounds[0];
}

function axisTracking(loaded: Loaded[]): Panel[] {
    const reference = loaded[0].episode;
    const axes: [string, string][] = [["pe_x", "ref_x"], ["pe_y", "ref_y"], ["pe_z", "ref_z"]];
    return axes.map(([peName, refName], i) => {
        const series: Series[] = loaded.map(({ episode, label, color }) => ({
            xs: column(episode, "t"),
            ys: column(episode, peName),
            color,
            label: i === 0 ? label : undefined,
        }));
        series.push({
            xs: column(reference, "t"),
            ys: column(reference, refName),
            color: PALETTE.red,
            label: i === 0 ? "reference" : undefined,
            dash: true,
        });
        return {
            title: `end-effector ${peName.slice(-1)} [m]`,
            xLabel: "t [s]",
            yLabel: `${peName.slice(-1)} [m]`,
            series,
        };
    });
}

function containment(loaded: Loaded[]): Panel[] {
    const radius = sharedBound(loaded, "bound_r");
    const series: Series[] = loaded.map(({ episode, label, color }) => ({
        xs: column(episode, "t"),
        ys: column(episode, "deviation"),
        color,
        label,
    }));
    return [
        {
            title: "workspace deviation",
            xLabel: "t [s]",
            yLabel: "deviation [m]",
            series,
            hlines: [{ y: radius, color: PALETTE.red, label: "allowed radius" }],
            yInclude: [0, radius * 1.15],
        },
    ];
}

function clearance(loaded: Loaded[]): Panel[] {
    const names = clearanceColumns(loaded[0].episode);
    if (names.length === 0) {
        throw new SchemaError("episode has no clear_* columns");
    }
    for (const { episode, label } of loaded) {
        for (const name of names) {
            if (!hasColumn(episode, name)) {
                throw new SchemaError(`${label} has no ${name} column`);
            }
        }
    }
    const margin = sharedBound(loaded, "bound_s_min");
    const single = loaded.length === 1;
    const series: Series[] = [];
    for (const { episode, label, color } of loaded) {
        names.forEach((name, i) => {
            series.push({
                xs: column(episode, "t"),
                ys: column(episode, name),
                // one log gets a color per critical point, several get one each
                color: single ? SERIES_COLORS[i % SERIES_COLORS.length] : color,
                label: single ? name.slice("clear_".length) : i === 0 ? label : undefined,
            });
        });
    }
    return [
        {
            title: "wall clearance",
            xLabel: "t [s]",
            yLabel: "clearance [m]",
            series,
            hlines: [{ y: margin, color: PALETTE.red, label: "safety margin" }],
            yInclude: [0],
        },
    ];
}

export function render(job: PlotJob): void {
    if (job.inputs.length === 0) {
        throw new Error("at least one input file is required");
    }
    if (job.inputs.length > SERIES_COLORS.length) {
        throw new Error(`at most ${SERIES_COLORS.length} inputs can be overlaid`);
    }
    const loaded: Loaded[] = job.inputs.map((path, i) => ({
        episode: loadEpisode(path),
        label: basename(path).replace(/\.csv$/, ""),
        color: SERIES_COLORS[i],
    }));
    for (const { episode, label } of loaded) {
        if (episode.rows.length < 2) {
            throw new SchemaError(`${label} covers fewer than two time steps`);
        }
    }
    let panels: Panel[];
    switch (job.kind) {
        case "axis_tracking":
            panels = axisTracking(loaded);
            break;
        case "containment":
            panels = containment(loaded);
            break;
        case "clearance":
            panels = clearance(loaded);
            break;
        default:
            throw new Error(`unknown figure kind ${String(job.kind)}`);
    }
    writeFileSync(job.output, renderFigure(panels));
}
