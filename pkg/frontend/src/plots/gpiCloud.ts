/**
 * Workspace point-cloud figure, four panels: sampled workspace, isotropy,
 * velocity index, payload index (the vector indices shown as their mean
 * over the three axes). Clouds are drawn in the y-z projection where the
 * limb's lateral structure is visible.
 */

import { Table, column } from "../csv.js";
import { Panel, document as svgDoc, extent } from "../svg.js";

function mean3(a: number[], b: number[], c: number[]): number[] {
    return a.map((v, i) => (v + b[i] + c[i]) / 3);
}

export function renderGpiCloud(table: Table): string {
    const y = column(table, "y");
    const z = column(table, "z");
    const iso = column(table, "isotropy");
    const vel = mean3(column(table, "vx"), column(table, "vy"), column(table, "vz"));
    const pay = mean3(column(table, "fx"), column(table, "fy"), column(table, "fz"));

    const panels: Array<{ title: string; values: number[] | null }> = [
        { title: "workspace samples", values: null },
        { title: "isotropy", values: iso },
        { title: "velocity index (mean m/s)", values: vel },
        { title: "payload index (mean N)", values: pay },
    ];

    const panelW = 240;
    const panelH = 240;
    const margin = 58;
    const width = 2 * (panelW + margin) + margin;
    const height = 2 * (panelH + margin) + margin;
    const xe = extent(y);
    const ye = extent(z);

    const body: string[] = [];
    panels.forEach((p, i) => {
        const col = i % 2;
        const row = Math.floor(i / 2);
        const panel = new Panel(
            margin + col * (panelW + margin),
            margin + row * (panelH + margin),
            panelW,
            panelH,
            xe,
            ye,
            p.title,
        );
        panel.frame("y (m)", "z (m)");
        if (p.values === null) {
            panel.dots(y, z, "#2471a3", 1.8);
        } else {
            const vals = p.values.filter((v) => Number.isFinite(v));
            const lo = Math.min(...vals);
            const hi = Math.max(...vals);
            panel.cloud(y, z, p.values, lo, hi);
        }
        body.push(panel.render());
    });
    return svgDoc(width, height, body.join("\n"));
}
