/**
 * State-tracking time series: planar velocities, yaw rate, and height
 * against their references (reference file optional; without it only the
 * measured series render).
 */

import { Table, column } from "../csv.js";
import { COLORS, Panel, document as svgDoc, extent, legend } from "../svg.js";

const CHANNELS: Array<{ title: string; state: string; ref: string; unit: string }> = [
    { title: "forward velocity", state: "vx", ref: "ref_vx", unit: "m/s" },
    { title: "lateral velocity", state: "vy", ref: "ref_vy", unit: "m/s" },
    { title: "yaw rate", state: "wz", ref: "ref_wz", unit: "rad/s" },
    { title: "height", state: "pz", ref: "ref_pz", unit: "m" },
];

export function renderTracking(log: Table, ref: Table | null): string {
    const t = column(log, "time");
    const panelW = 330;
    const panelH = 150;
    const margin = 56;
    const width = 2 * (panelW + margin) + margin;
    const height = 2 * (panelH + margin) + margin + 20;
    const body: string[] = [];

    CHANNELS.forEach((ch, i) => {
        const colI = i % 2;
        const rowI = Math.floor(i / 2);
        const meas = column(log, ch.state);
        const refSeries = ref ? column(ref, ch.ref) : null;
        const ys = refSeries ? meas.concat(refSeries) : meas;
        const panel = new Panel(
            margin + colI * (panelW + margin),
            margin + rowI * (panelH + margin),
            panelW,
            panelH,
            extent(t, 0),
            extent(ys),
            ch.title,
        );
        panel.frame("time (s)", ch.unit);
        if (refSeries) {
            panel.line(t, refSeries, COLORS[0]);
        }
        panel.line(t, meas, COLORS[1]);
        body.push(panel.render());
    });
    body.push(
        legend(width - 150, 16, [
            { label: "reference", color: COLORS[0] },
            { label: "measured", color: COLORS[1] },
        ]),
    );
    return svgDoc(width, height, body.join("\n"));
}
