/**
 * Episode-log CSV loading and schema checks.
 *
 * The simulator writes one row per outer planner step.  A fixed block of
 * columns always leads: time, the twelve-entry state, the six planned
 * accelerations, then end-effector position and its reference.  Optional
 * blocks follow depending on the scenario: barrier values paired with
 * their decrease-condition residuals, wall clearances with their shared
 * bound, and the workspace deviation with its radius.  This module only
 * pins down the fixed block and looks optional columns up by name, so the
 * two sides stay coupled through the file format alone.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "SchemaError";
    }
}

export const FIXED_COLUMNS = [
    "t",
    "x", "y", "z", "vx", "vy", "vz",
    "psi", "psi_dot", "theta1", "theta2", "theta1_dot", "theta2_dot",
    "ax", "ay", "az", "psi_ddot", "theta1_ddot", "theta2_ddot",
    "pe_x", "pe_y", "pe_z", "ref_x", "ref_y", "ref_z",
];

// every column is numeric except the per-step solver status
const TEXT_COLUMNS = new Set(["solver_status"]);

export interface Episode {
    columns: string[];
    rows: number[][]; // row-major, aligned with columns; NaN at text columns
    text: Record<string, string[]>;
}

function parseField(raw: string, name: string, row: number): number {
    const text = raw.trim();
    if (text === "") {
        throw new SchemaError(`row ${row}: empty ${name} field`);
    }
    // the log serializes missing residuals as nan; keep those readable
    const lower = text.toLowerCase();
    if (lower === "nan") return NaN;
    if (lower === "inf") return Infinity;
    if (lower === "-inf") return -Infinity;
    const value = Number(text);
    if (Number.isNaN(value)) {
        throw new SchemaError(`row ${row}: ${name} field ${JSON.stringify(raw)} is not numeric`);
    }
    return value;
}

export function parseEpisode(source: string): Episode {
    const lines = source.split("\n").map((line) => line.replace(/\r$/, ""));
    while (lines.length > 0 && lines[lines.length - 1] === "") {
        lines.pop();
    }
    if (lines.length === 0) {
        throw new SchemaError("episode file is empty");
    }
    const columns = lines[0].split(",");
    for (let i = 0; i < FIXED_COLUMNS.length; i++) {
        if (columns[i] !== FIXED_COLUMNS[i]) {
            throw new SchemaError(
                `header column ${i} should be ${FIXED_COLUMNS[i]}, found ${columns[i] ?? "nothing"}`,
            );
        }
    }
    if (lines.length === 1) {
        throw new SchemaError("episode file has no data rows");
    }
    const rows: number[][] = [];
    const text: Record<string, string[]> = {};
    for (const name of columns) {
        if (TEXT_COLUMNS.has(name)) text[name] = [];
    }
    for (let i = 1; i < lines.length; i++) {
        const parts = lines[i].split(",");
        if (parts.length !== columns.length) {
            throw new SchemaError(
                `row ${i} has ${parts.length} fields, header has ${columns.length}`,
            );
        }
        rows.push(
            parts.map((part, j) => {
                const name = columns[j];
                if (TEXT_COLUMNS.has(name)) {
                    if (part.trim() === "") {
                        throw new SchemaError(`row ${i}: empty ${name} field`);
                    }
                    text[name].push(part);
                    return NaN;
                }
                return parseField(part, name, i);
            }),
        );
    }
    return { columns, rows, text };
}

export function loadEpisode(path: string): Episode {
    return parseEpisode(readFileSync(path, "utf-8"));
}

export function column(episode: Episode, name: string): number[] {
    const index = episode.columns.indexOf(name);
    if (index < 0) {
        throw new SchemaError(`episode has no ${name} column`);
    }
    if (TEXT_COLUMNS.has(name)) {
        throw new SchemaError(`${name} is a text column`);
    }
    return episode.rows.map((row) => row[index]);
}

export function textColumn(episode: Episode, name: string): string[] {
    const values = episode.text[name];
    if (values === undefined) {
        throw new SchemaError(`episode has no ${name} text column`);
    }
    return values;
}

export function hasColumn(episode: Episode, name: string): boolean {
    return episode.columns.includes(name);
}

/** Names of the per-point wall-clearance columns, in file order. */
export function clearanceColumns(episode: Episode): string[] {
    return episode.columns.filter((name) => name.startsWith("clear_"));
}
