/**
 * Parsing of the simulator's CSV artifacts.
 *
 * Every file starts with a `# <schema> config=<hash>` comment followed by a
 * header row. Parsing is strict about the schema version so stale files
 * fail loudly instead of rendering garbage.
 */

import { readFileSync } from "node:fs";

export class SchemaMismatch extends Error {}
export class EmptyInput extends Error {}

export interface Table {
    schema: string;
    configHash: string;
    columns: string[];
    /** column-major numeric data; NaN for blank/non-numeric cells */
    values: number[][];
    /** raw string cells for non-numeric columns */
    raw: string[][];
    rowCount: number;
}

const KNOWN_SCHEMAS = ["orlsim-log v1", "orlsim-sweep v1", "orlsim-gpi v1"];

export function parseCsv(text: string, expectSchema?: string): Table {
    const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
    if (lines.length === 0) throw new EmptyInput("input file is empty");
    const head = lines[0];
    if (!head.startsWith("#")) throw new SchemaMismatch("missing schema comment line");
    const m = head.match(/^#\s*(\S+ v\d+)\s+config=(\S+)/);
    if (!m) throw new SchemaMismatch(`unparseable schema line: ${head}`);
    const schema = m[1];
    if (!KNOWN_SCHEMAS.includes(schema)) {
        throw new SchemaMismatch(`unknown schema ${schema}`);
    }
    if (expectSchema && schema !== expectSchema) {
        throw new SchemaMismatch(`expected ${expectSchema}, found ${schema}`);
    }
    if (lines.length < 2) throw new EmptyInput("no header row");
    const columns = lines[1].split(",");
    const rows = lines.slice(2);
    if (rows.length === 0) throw new EmptyInput("no data rows");
    const values: number[][] = columns.map(() => []);
    const raw: string[][] = columns.map(() => []);
    for (const line of rows) {
        const cells = line.split(",");
        if (cells.length !== columns.length) {
            throw new SchemaMismatch(
                `row has ${cells.length} cells, header has ${columns.length}`,
            );
        }
        cells.forEach((c, i) => {
            raw[i].push(c);
            const v = c === "" ? NaN : Number(c);
            values[i].push(Number.isFinite(v) ? v : NaN);
        });
    }
    return { schema, configHash: m[2], columns, values, raw, rowCount: rows.length };
}

export function readCsv(path: string, expectSchema?: string): Table {
    let text: string;
    try {
        text = readFileSync(path, "utf8");
    } catch (e) {
        throw new EmptyInput(`cannot read ${path}`);
    }
    return parseCsv(text, expectSchema);
}

export function column(table: Table, name: string): number[] {
    const i = table.columns.indexOf(name);
    if (i < 0) throw new SchemaMismatch(`missing column ${name}`);
    return table.values[i];
}

export function rawColumn(table: Table, name: string): string[] {
    const i = table.columns.indexOf(name);
    if (i < 0) throw new SchemaMismatch(`missing column ${name}`);
    return table.raw[i];
}
