import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { FIXED_COLUMNS, SchemaError } from "../src/episode.js";
import { PALETTE, render } from "../src/plots.js";
import { main } from "../src/cli.js";

const WORKSPACE_BLF = fileURLToPath(new URL("../fixtures/workspace_blf.csv", import.meta.url));
const WORKSPACE_NAIVE = fileURLToPath(new URL("../fixtures/workspace_naive.csv", import.meta.url));
const WALLS_BLF = fileURLToPath(new URL("../fixtures/walls_blf.csv", import.meta.url));

const scratch = mkdtempSync(join(tmpdir(), "amsim-plots-"));

/** Pixel y per trace point, one list per polyline (SVG y grows downward). */
function traceYs(svg: string): number[][] {
    const traces: number[][] = [];
    for (const match of svg.matchAll(/<polyline class="trace"[^>]*points="([^"]*)"/g)) {
        traces.push(match[1].split(" ").map((pair) => Number(pair.split(",")[1])));
    }
    return traces;
}

function boundY(svg: string): number {
    const match = svg.match(/<line class="bound"[^>]*y1="([0-9.]+)"/);
    expect(match).not.toBeNull();
    return Number(match![1]);
}

function renderTo(name: string, kind: "axis_tracking" | "containment" | "clearance", inputs: string[]): string {
    const output = join(scratch, name);
    render({ kind, inputs, output });
    return readFileSync(output, "utf-8");
}

describe("containment figure", () => {
    it("keeps a compliant run inside the radius line", () => {
        const svg = renderTo("blf.svg", "containment", [WORKSPACE_BLF]);
        const bound = boundY(svg);
        const traces = traceYs(svg);
        expect(traces.length).toBe(1);
        // deviation below the radius means the trace sits below the line
        for (const y of traces[0]) {
            expect(y).toBeGreaterThan(bound);
        }
    });

    it("shows a violating run crossing the radius line", () => {
        const svg = renderTo("naive.svg", "containment", [WORKSPACE_NAIVE]);
        const bound = boundY(svg);
        const crossed = traceYs(svg)[0].some((y) => y < bound);
        expect(crossed).toBe(true);
    });

    it("overlays runs and labels them", () => {
        const svg = renderTo("both.svg", "containment", [WORKSPACE_BLF, WORKSPACE_NAIVE]);
        expect(traceYs(svg).length).toBe(2);
        expect(svg).toContain("workspace_blf");
        expect(svg).toContain("workspace_naive");
        expect(svg).toContain(PALETTE.red);
    });

    it("rejects a log without the workspace block", () => {
        expect(() => render({ kind: "containment", inputs: [WALLS_BLF], output: join(scratch, "x.svg") }))
            .toThrow(SchemaError);
    });

    it("leaves its inputs untouched", () => {
        const before = readFileSync(WORKSPACE_BLF);
        renderTo("again.svg", "containment", [WORKSPACE_BLF]);
        expect(readFileSync(WORKSPACE_BLF).equals(before)).toBe(true);
    });
});

describe("clearance figure", () => {
    it("draws every critical point against the margin line", () => {
        const raw = readFileSync(WALLS_BLF, "utf-8");
        const points = raw.split("\n")[0].split(",").filter((c) => c.startsWith("clear_")).length;
        const svg = renderTo("walls.svg", "clearance", [WALLS_BLF]);
        const traces = traceYs(svg);
        expect(traces.length).toBe(points);
        // this run keeps its distance, so every trace stays above the line
        const bound = boundY(svg);
        for (const trace of traces) {
            for (const y of trace) {
                expect(y).toBeLessThan(bound);
            }
        }
    });

    it("rejects a log without clearance columns", () => {
        expect(() => render({ kind: "clearance", inputs: [WORKSPACE_BLF], output: join(scratch, "x.svg") }))
            .toThrow(SchemaError);
    });
});

describe("axis tracking figure", () => {
    it("draws three panels with a dashed reference each", () => {
        const svg = renderTo("axes.svg", "axis_tracking", [WORKSPACE_BLF]);
        expect(svg.match(/<g class="panel"/g)?.length).toBe(3);
        expect(traceYs(svg).length).toBe(6); // position plus reference per axis
        expect(svg).toContain("reference");
    });
});

describe("render", () => {
    function minimalCsv(bound: string): string {
        const fixed = Array(FIXED_COLUMNS.length).fill("0.1");
        return (
            [...FIXED_COLUMNS, "deviation", "bound_r"].join(",") +
            "\n" + [...fixed, "0.02", bound].join(",") +
            "\n" + [...fixed, "0.03", bound].join(",") + "\n"
        );
    }

    it("rejects a single-step log", () => {
        const path = join(scratch, "short.csv");
        writeFileSync(path, minimalCsv("0.1").split("\n").slice(0, 2).join("\n") + "\n");
        expect(() => render({ kind: "containment", inputs: [path], output: join(scratch, "x.svg") }))
            .toThrow(/fewer than two/);
    });

    it("rejects inputs that disagree on the bound", () => {
        const a = join(scratch, "a.csv");
        const b = join(scratch, "b.csv");
        writeFileSync(a, minimalCsv("0.1"));
        writeFileSync(b, minimalCsv("0.2"));
        expect(() => render({ kind: "containment", inputs: [a, b], output: join(scratch, "x.svg") }))
            .toThrow(/disagree/);
    });

    it("rejects an empty input list", () => {
        expect(() => render({ kind: "containment", inputs: [], output: join(scratch, "x.svg") }))
            .toThrow(/at least one/);
    });
});

describe("cli", () => {
    it("renders through the plot subcommand", () => {
        const out = join(scratch, "cli.svg");
        expect(main(["plot", "--kind", "containment", "--in", WORKSPACE_BLF, "--out", out])).toBe(0);
        expect(existsSync(out)).toBe(true);
    });

    it("rejects bad usage", () => {
        expect(main([])).toBe(2);
        expect(main(["plot", "--kind", "containment"])).toBe(2);
        expect(main(["plot", "--kind", "sideways", "--in", WORKSPACE_BLF, "--out", "x.svg"])).toBe(2);
        expect(main(["plot", "--kind"])).toBe(2);
        expect(main(["plot", "--wat", "1", "--kind", "containment", "--in", WORKSPACE_BLF, "--out", "x.svg"])).toBe(2);
    });

    it("reports unreadable and malformed inputs", () => {
        expect(main(["plot", "--kind", "containment", "--in", "missing.csv", "--out", join(scratch, "x.svg")])).toBe(1);
        const bad = join(scratch, "bad.csv");
        writeFileSync(bad, "not,a,log\n1,2,3\n");
        expect(main(["plot", "--kind", "containment", "--in", bad, "--out", join(scratch, "x.svg")])).toBe(1);
    });
});
