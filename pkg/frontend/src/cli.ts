#!/usr/bin/env node
/** Command-line front end: plot --kind <k> --in <csv> [--in <csv>] --out <path>. */

import { pathToFileURL } from "node:url";

import { SchemaError } from "./episode.js";
import { PLOT_KINDS, PlotKind, render } from "./plots.js";

const USAGE = `usage: amsim-plot plot --kind <${PLOT_KINDS.join("|")}> --in <csv> [--in <csv> ...] --out <path>`;

export function main(argv: string[]): number {
    if (argv[0] !== "plot") {
        console.error(USAGE);
        return 2;
    }
    let kind: string | undefined;
    let output: string | undefined;
    const inputs: string[] = [];
    for (let i = 1; i < argv.length; i += 2) {
        const flag = argv[i];
        const value = argv[i + 1];
        if (value === undefined) {
            console.error(`${flag} needs a value\n${USAGE}`);
            return 2;
        }
        if (flag === "--kind") kind = value;
        else if (flag === "--in") inputs.push(value);
        else if (flag === "--out") output = value;
        else {
            console.error(`unknown option ${flag}\n${USAGE}`);
            return 2;
        }
    }
    if (kind === undefined || output === undefined || inputs.length === 0) {
        console.error(USAGE);
        return 2;
    }
    if (!(PLOT_KINDS as string[]).includes(kind)) {
        console.error(`unknown figure kind ${kind}; expected one of ${PLOT_KINDS.join(", ")}`);
        return 2;
    }
    try {
        render({ kind: kind as PlotKind, inputs, output });
    } catch (err) {
        if (err instanceof SchemaError) {
            console.error(`schema error: ${err.message}`);
            return 1;
        }
        if (err instanceof Error) {
            console.error(err.message);
            return 1;
        }
        throw err;
    }
    return 0;
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
    process.exit(main(process.argv.slice(2)));
}
