/**
 * CLI entry: render an orlsim artifact to SVG.
 *
 *   node dist/render.js --kind cot-sweep --input sweep.csv --out fig8.svg
 *   node dist/render.js --kind gpi-cloud --input gpi.csv --out fig5.svg
 *   node dist/render.js --kind tracking --input log.csv --ref ref.csv --out track.svg
 *   node dist/render.js --kind gait --input log.csv --out gait.svg
 *
 * Exit codes: 0 ok, 2 bad arguments, 3 schema mismatch, 4 empty input.
 */

import { writeFileSync } from "node:fs";

import { EmptyInput, SchemaMismatch, readCsv } from "./csv.js";
import { renderCotSweep } from "./plots/cotSweep.js";
import { renderGait } from "./plots/gait.js";
import { renderGpiCloud } from "./plots/gpiCloud.js";
import { renderTracking } from "./plots/tracking.js";

const KINDS = ["cot-sweep", "gpi-cloud", "tracking", "gait"] as const;
type Kind = (typeof KINDS)[number];

interface Args {
    kind: Kind;
    input: string;
    out: string;
    ref?: string;
}

export function parseArgs(argv: string[]): Args {
    const get = (flag: string): string | undefined => {
        const i = argv.indexOf(flag);
        return i >= 0 && i + 1 < argv.length ? argv[i + 1] : undefined;
    };
    const kind = get("--kind") as Kind | undefined;
    const input = get("--input");
    const out = get("--out");
    if (!kind || !KINDS.includes(kind) || !input || !out) {
        throw new Error(
            `usage: render --kind {${KINDS.join("|")}} --input FILE [--ref FILE] --out FILE.svg`,
        );
    }
    return { kind, input, out, ref: get("--ref") };
}

export function renderToString(args: Args): string {
    switch (args.kind) {
        case "cot-sweep":
            return renderCotSweep(readCsv(args.input, "orlsim-sweep v1"));
        case "gpi-cloud":
            return renderGpiCloud(readCsv(args.input, "orlsim-gpi v1"));
        case "tracking": {
            const log = readCsv(args.input, "orlsim-log v1");
            const ref = args.ref ? readCsv(args.ref, "orlsim-log v1") : null;
            return renderTracking(log, ref);
        }
        case "gait":
            return renderGait(readCsv(args.input, "orlsim-log v1"));
    }
}

export function main(argv: string[]): number {
    let args: Args;
    try {
        args = parseArgs(argv);
    } catch (e) {
        console.error((e as Error).message);
        return 2;
    }
    try {
        const svg = renderToString(args);
        writeFileSync(args.out, svg);
        console.log(`${args.kind} -> ${args.out}`);
        return 0;
    } catch (e) {
        if (e instanceof SchemaMismatch) {
            console.error(`schema mismatch: ${e.message}`);
            return 3;
        }
        if (e instanceof EmptyInput) {
            console.error(`empty input: ${e.message}`);
            return 4;
        }
        throw e;
    }
}

if (process.argv[1] && process.argv[1].endsWith("render.js")) {
    process.exit(main(process.argv.slice(2)));
}
