/**
 * Gait timing diagram: one stripe per leg, filled while in contact.
 */

import { Table, column } from "../csv.js";
import { Panel, document as svgDoc, extent } from "../svg.js";

const LEGS = ["fl", "fr", "rl", "rr"];

export function renderGait(log: Table): string {
    const t = column(log, "time");
    const margin = 56;
    const panelW = 640;
    const panelH = 160;
    const width = panelW + 2 * margin;
    const height = panelH + 2 * margin;
    const panel = new Panel(
        margin, margin, panelW, panelH,
        extent(t, 0), { min: 0, max: LEGS.length }, "contact schedule",
    );
    panel.frame("time (s)", "");
    const body: string[] = [];
    LEGS.forEach((leg, li) => {
        const c = column(log, `contact_${leg}`);
        const y0 = LEGS.length - 1 - li + 0.18;
        const y1 = LEGS.length - 1 - li + 0.82;
        let start: number | null = null;
        for (let i = 0; i < t.length; i++) {
            const on = c[i] > 0.5;
            if (on && start === null) start = t[i];
            if ((!on || i === t.length - 1) && start !== null) {
                const end = on ? t[i] : t[Math.max(i - 1, 0)];
                panel.bar(start, end, y0, y1, "#2c3e50");
                start = null;
            }
        }
        body.push(
            `<text x="${margin - 8}" y="${panel.py(y0 + 0.32).toFixed(1)}" text-anchor="end" font-size="11" font-family="sans-serif">${leg.toUpperCase()}</text>`,
        );
    });
    body.unshift(panel.render());
    return svgDoc(width, height, body.join("\n"));
}
