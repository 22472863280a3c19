import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
    FIXED_COLUMNS,
    SchemaError,
    clearanceColumns,
    column,
    hasColumn,
    parseEpisode,
    textColumn,
} from "../src/episode.js";

const WORKSPACE_BLF = fileURLToPath(new URL("../fixtures/workspace_blf.csv", import.meta.url));
const WALLS_BLF = fileURLToPath(new URL("../fixtures/walls_blf.csv", import.meta.url));

function header(extra: string[] = []): string {
    return [...FIXED_COLUMNS, ...extra].join(",");
}

function row(width: number, fill = "0.5"): string {
    return Array(width).fill(fill).join(",");
}

describe("parseEpisode", () => {
    it("reads a simulator log", () => {
        const episode = parseEpisode(readFileSync(WORKSPACE_BLF, "utf-8"));
        expect(episode.columns.slice(0, FIXED_COLUMNS.length)).toEqual(FIXED_COLUMNS);
        expect(episode.rows.length).toBeGreaterThan(100);
        const t = column(episode, "t");
        expect(t[0]).toBe(0);
        expect(t[1]).toBeCloseTo(0.1, 12);
        // workspace runs carry the deviation block, not the wall block
        expect(hasColumn(episode, "deviation")).toBe(true);
        expect(hasColumn(episode, "bound_r")).toBe(true);
        expect(clearanceColumns(episode)).toEqual([]);
        // the solver status is text and kept apart from the numbers
        const statuses = textColumn(episode, "solver_status");
        expect(statuses.length).toBe(episode.rows.length);
        expect(statuses.every((s) => s.length > 0)).toBe(true);
        expect(() => column(episode, "solver_status")).toThrow(/text column/);
    });

    it("reads wall clearances from an avoidance log", () => {
        const episode = parseEpisode(readFileSync(WALLS_BLF, "utf-8"));
        expect(clearanceColumns(episode).length).toBeGreaterThan(0);
        expect(hasColumn(episode, "bound_s_min")).toBe(true);
        expect(hasColumn(episode, "deviation")).toBe(false);
    });

    it("rejects an empty file", () => {
        expect(() => parseEpisode("")).toThrow(SchemaError);
    });

    it("rejects a header with no data rows", () => {
        expect(() => parseEpisode(header() + "\n")).toThrow(/no data rows/);
    });

    it("rejects a renamed fixed column", () => {
        const bad = header().replace("theta1", "elbow");
        const text = bad + "\n" + row(FIXED_COLUMNS.length);
        expect(() => parseEpisode(text)).toThrow(SchemaError);
    });

    it("rejects a truncated header", () => {
        const bad = FIXED_COLUMNS.slice(0, 10).join(",");
        expect(() => parseEpisode(bad + "\n" + row(10))).toThrow(SchemaError);
    });

    it("rejects a short row", () => {
        const text = header() + "\n" + row(FIXED_COLUMNS.length - 1);
        expect(() => parseEpisode(text)).toThrow(/fields/);
    });

    it("rejects a non-numeric field", () => {
        const text = header() + "\n" + row(FIXED_COLUMNS.length, "abc");
        expect(() => parseEpisode(text)).toThrow(/not numeric/);
    });

    it("rejects an empty field", () => {
        const text = header() + "\n" + row(FIXED_COLUMNS.length, "");
        expect(() => parseEpisode(text)).toThrow(/empty/);
    });

    it("accepts nan in optional columns", () => {
        const text =
            header(["h_a", "res_a"]) +
            "\n" +
            row(FIXED_COLUMNS.length) +
            ",0.2,nan";
        const episode = parseEpisode(text);
        expect(column(episode, "res_a")[0]).toBeNaN();
    });

    it("tolerates CRLF line endings", () => {
        const text = header() + "\r\n" + row(FIXED_COLUMNS.length) + "\r\n";
        expect(parseEpisode(text).rows.length).toBe(1);
    });

    it("names the missing column on lookup", () => {
        const episode = parseEpisode(header() + "\n" + row(FIXED_COLUMNS.length));
        expect(() => column(episode, "deviation")).toThrow(/deviation/);
    });
});
