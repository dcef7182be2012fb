/**
 * Minimal deterministic SVG scene builder: panels with linear axes,
 * polylines that break at NaN samples (the gap convention for missing
 * sweep cells), scatter points, and a fixed color cycle. Output depends
 * only on the input data.
 */

export interface Extent {
    min: number;
    max: number;
}

export function extent(values: number[], pad = 0.05): Extent {
    const xs = values.filter((v) => Number.isFinite(v));
    if (xs.length === 0) return { min: 0, max: 1 };
    let min = Math.min(...xs);
    let max = Math.max(...xs);
    if (min === max) {
        min -= 0.5;
        max += 0.5;
    }
    const span = max - min;
    return { min: min - pad * span, max: max + pad * span };
}

export const COLORS = [
    "#c0392b", "#2471a3", "#1e8449", "#af601a", "#6c3483", "#117a65",
    "#7b7d7d", "#b7950b",
];

function f(v: number): string {
    return Number(v.toFixed(2)).toString();
}

export class Panel {
    private parts: string[] = [];

    constructor(
        readonly x: number,
        readonly y: number,
        readonly w: number,
        readonly h: number,
        readonly xext: Extent,
        readonly yext: Extent,
        readonly title = "",
    ) {}

    px(v: number): number {
        return this.x + ((v - this.xext.min) / (this.xext.max - this.xext.min)) * this.w;
    }

    py(v: number): number {
        return this.y + this.h - ((v - this.yext.min) / (this.yext.max - this.yext.min)) * this.h;
    }

    frame(xlabel = "", ylabel = ""): this {
        this.parts.push(
            `<rect x="${f(this.x)}" y="${f(this.y)}" width="${f(this.w)}" height="${f(this.h)}" fill="none" stroke="#333" stroke-width="1"/>`,
        );
        if (this.title) {
            this.parts.push(
                `<text x="${f(this.x + this.w / 2)}" y="${f(this.y - 8)}" text-anchor="middle" font-size="13" font-family="sans-serif">${this.title}</text>`,
            );
        }
        if (xlabel) {
            this.parts.push(
                `<text x="${f(this.x + this.w / 2)}" y="${f(this.y + this.h + 30)}" text-anchor="middle" font-size="11" font-family="sans-serif">${xlabel}</text>`,
            );
        }
        if (ylabel) {
            const cx = this.x - 38;
            const cy = this.y + this.h / 2;
            this.parts.push(
                `<text x="${f(cx)}" y="${f(cy)}" text-anchor="middle" font-size="11" font-family="sans-serif" transform="rotate(-90 ${f(cx)} ${f(cy)})">${ylabel}</text>`,
            );
        }
        for (const t of [0, 0.5, 1]) {
            const vx = this.xext.min + t * (this.xext.max - this.xext.min);
            const vy = this.yext.min + t * (this.yext.max - this.yext.min);
            this.parts.push(
                `<text x="${f(this.px(vx))}" y="${f(this.y + this.h + 14)}" text-anchor="middle" font-size="9" font-family="sans-serif">${Number(vx.toPrecision(3))}</text>`,
                `<text x="${f(this.x - 4)}" y="${f(this.py(vy) + 3)}" text-anchor="end" font-size="9" font-family="sans-serif">${Number(vy.toPrecision(3))}</text>`,
            );
        }
        return this;
    }

    /** Polyline broken at NaN values: missing cells render as gaps. */
    line(xs: number[], ys: number[], color: string, dash = ""): this {
        let seg: string[] = [];
        const flush = () => {
            if (seg.length >= 2) {
                this.parts.push(
                    `<polyline points="${seg.join(" ")}" fill="none" stroke="${color}" stroke-width="1.5"${dash ? ` stroke-dasharray="${dash}"` : ""}/>`,
                );
            } else if (seg.length === 1) {
                const [px, py] = seg[0].split(",").map(Number);
                this.parts.push(
                    `<circle cx="${f(px)}" cy="${f(py)}" r="2.5" fill="${color}"/>`,
                );
            }
            seg = [];
        };
        for (let i = 0; i < xs.length; i++) {
            if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) {
                seg.push(`${f(this.px(xs[i]))},${f(this.py(ys[i]))}`);
            } else {
                flush();
            }
        }
        flush();
        return this;
    }

    dots(xs: number[], ys: number[], color: string, r = 2): this {
        for (let i = 0; i < xs.length; i++) {
            if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
            this.parts.push(
                `<circle cx="${f(this.px(xs[i]))}" cy="${f(this.py(ys[i]))}" r="${r}" fill="${color}"/>`,
            );
        }
        return this;
    }

    /** Color-mapped scatter: values in [lo, hi] shade blue -> red. */
    cloud(xs: number[], ys: number[], values: number[], lo: number, hi: number): this {
        for (let i = 0; i < xs.length; i++) {
            if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
            const t = hi > lo ? Math.min(1, Math.max(0, (values[i] - lo) / (hi - lo))) : 0.5;
            const rC = Math.round(40 + 200 * t);
            const bC = Math.round(220 - 180 * t);
            this.parts.push(
                `<circle cx="${f(this.px(xs[i]))}" cy="${f(this.py(ys[i]))}" r="1.8" fill="rgb(${rC},80,${bC})"/>`,
            );
        }
        return this;
    }

    bar(x0: number, x1: number, y0: number, y1: number, color: string): this {
        this.parts.push(
            `<rect x="${f(this.px(x0))}" y="${f(this.py(y1))}" width="${f(this.px(x1) - this.px(x0))}" height="${f(this.py(y0) - this.py(y1))}" fill="${color}"/>`,
        );
        return this;
    }

    render(): string {
        return this.parts.join("\n");
    }
}

export function legend(
    x: number,
    y: number,
    entries: Array<{ label: string; color: string; dash?: string }>,
): string {
    const parts: string[] = [];
    entries.forEach((e, i) => {
        const yy = y + i * 16;
        parts.push(
            `<line x1="${x}" y1="${yy}" x2="${x + 22}" y2="${yy}" stroke="${e.color}" stroke-width="2"${e.dash ? ` stroke-dasharray="${e.dash}"` : ""}/>`,
            `<text x="${x + 28}" y="${yy + 4}" font-size="10" font-family="sans-serif">${e.label}</text>`,
        );
    });
    return parts.join("\n");
}

export function document(width: number, height: number, body: string): string {
    return (
        `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">\n` +
        `<rect width="${width}" height="${height}" fill="white"/>\n` +
        body +
        "\n</svg>\n"
    );
}
