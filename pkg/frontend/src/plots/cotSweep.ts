/**
 * Cost-of-transport sweep figure: one panel per motion, COT (RCOT for
 * turning) against speed, one series per variant x foothold offset.
 * Cells whose status is not ok keep their grid slot as a gap.
 */

import { Table, column, rawColumn } from "../csv.js";
import { COLORS, Panel, document as svgDoc, extent, legend } from "../svg.js";

export interface SeriesPoint {
    speed: number;
    cot: number; // NaN for absent cells
}

export interface SweepSeries {
    motion: string;
    variant: string;
    foothold: number;
    points: SeriesPoint[];
}

export function extractSeries(table: Table): SweepSeries[] {
    const motion = rawColumn(table, "motion");
    const variant = rawColumn(table, "variant");
    const status = rawColumn(table, "status");
    const foothold = column(table, "foothold_m");
    const speed = column(table, "target_speed");
    const cot = column(table, "cot");
    const bySeries = new Map<string, SweepSeries>();
    for (let i = 0; i < table.rowCount; i++) {
        const key = `${motion[i]}|${variant[i]}|${foothold[i]}`;
        let s = bySeries.get(key);
        if (!s) {
            s = { motion: motion[i], variant: variant[i], foothold: foothold[i], points: [] };
            bySeries.set(key, s);
        }
        s.points.push({
            speed: speed[i],
            cot: status[i] === "ok" ? cot[i] : NaN,
        });
    }
    for (const s of bySeries.values()) {
        s.points.sort((a, b) => a.speed - b.speed);
    }
    return [...bySeries.values()];
}

export function renderCotSweep(table: Table): string {
    const series = extractSeries(table);
    const motions = [...new Set(series.map((s) => s.motion))];
    const panelW = 300;
    const panelH = 260;
    const margin = 60;
    const width = motions.length * (panelW + margin) + margin + 140;
    const height = panelH + 2 * margin + 20;

    const body: string[] = [];
    const styleOf = new Map<string, { color: string; dash: string }>();
    let colorIdx = 0;
    for (const s of series) {
        const key = `${s.variant}|${s.foothold}`;
        if (!styleOf.has(key)) {
            styleOf.set(key, {
                color: COLORS[colorIdx % COLORS.length],
                dash: s.variant === "planar" ? "5,3" : "",
            });
            colorIdx++;
        }
    }

    motions.forEach((motion, mi) => {
        const ss = series.filter((s) => s.motion === motion);
        const xs = ss.flatMap((s) => s.points.map((p) => p.speed));
        const ys = ss.flatMap((s) => s.points.map((p) => p.cot));
        const panel = new Panel(
            margin + mi * (panelW + margin),
            margin,
            panelW,
            panelH,
            extent(xs),
            extent(ys),
            `${motion} trot`,
        );
        panel.frame(
            motion === "turn" ? "yaw rate (rad/s)" : "speed (m/s)",
            motion === "turn" ? "RCOT" : "COT",
        );
        for (const s of ss) {
            const st = styleOf.get(`${s.variant}|${s.foothold}`)!;
            panel.line(
                s.points.map((p) => p.speed),
                s.points.map((p) => p.cot),
                st.color,
                st.dash,
            );
            panel.dots(
                s.points.map((p) => p.speed),
                s.points.map((p) => p.cot),
                st.color,
                2.4,
            );
        }
        body.push(panel.render());
    });

    const entries = [...styleOf.entries()].map(([key, st]) => {
        const [variant, foothold] = key.split("|");
        return { label: `${variant} @ ${foothold} m`, color: st.color, dash: st.dash };
    });
    body.push(legend(width - 130, margin + 10, entries));
    return svgDoc(width, height, body.join("\n"));
}
