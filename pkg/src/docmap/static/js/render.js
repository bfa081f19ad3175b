const PALETTE = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];
function labelColor(label) {
    if (!label)
        return "#888888";
    let hash = 0;
    for (let i = 0; i < label.length; i++) {
        hash = (hash * 31 + label.charCodeAt(i)) | 0;
    }
    return PALETTE[Math.abs(hash) % PALETTE.length];
}
/** Rotate a 2- or 3-component view point into screen-plane coordinates. */
function toPlane(p, yaw, pitch) {
    if (p.length === 2)
        return [p[0], p[1]];
    const [x, y, z] = p;
    const x1 = Math.cos(yaw) * x + Math.sin(yaw) * z;
    const z1 = -Math.sin(yaw) * x + Math.cos(yaw) * z;
    const y1 = Math.cos(pitch) * y - Math.sin(pitch) * z1;
    return [x1, y1];
}
/**
 * Canvas scatter of the current view. Pan/zoom always; drag rotates when
 * the view is 3-d. Pure function of (state, canvas size): point positions
 * never depend on selection.
 */
export class ScatterRenderer {
    constructor(canvas) {
        this.canvas = canvas;
        this.positions = new Map();
        this.markerPos = null;
    }
    draw(state) {
        const ctx = this.canvas.getContext("2d");
        if (!ctx)
            return;
        const { width, height } = this.canvas;
        ctx.clearRect(0, 0, width, height);
        this.positions.clear();
        this.markerPos = null;
        if (state.view === null)
            return;
        const cam = state.camera;
        const planar = new Map();
        for (const [id, coords] of Object.entries(state.view.view_coords)) {
            planar.set(id, toPlane(coords, cam.yaw, cam.pitch));
        }
        const markerPlane = state.marker
            ? toPlane(state.marker.viewCoords, cam.yaw, cam.pitch)
            : null;
        let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
        for (const [x, y] of planar.values()) {
            minX = Math.min(minX, x);
            maxX = Math.max(maxX, x);
            minY = Math.min(minY, y);
            maxY = Math.max(maxY, y);
        }
        const spanX = maxX - minX || 1;
        const spanY = maxY - minY || 1;
        const scale = 0.85 * Math.min(width / spanX, height / spanY) * cam.zoom;
        const cx = (minX + maxX) / 2;
        const cy = (minY + maxY) / 2;
        const toScreen = ([x, y]) => [
            width / 2 + (x - cx) * scale + cam.panX,
            height / 2 - (y - cy) * scale + cam.panY,
        ];
        for (const [id, plane] of planar.entries()) {
            const [sx, sy] = toScreen(plane);
            this.positions.set(id, [sx, sy]);
            ctx.beginPath();
            ctx.arc(sx, sy, 3.5, 0, Math.PI * 2);
            ctx.fillStyle = labelColor(state.view.labels[id]);
            ctx.fill();
        }
        if (state.selected !== null) {
            const pos = this.positions.get(state.selected);
            if (pos) {
                ctx.beginPath();
                ctx.arc(pos[0], pos[1], 7, 0, Math.PI * 2);
                ctx.strokeStyle = "#111";
                ctx.lineWidth = 2;
                ctx.stroke();
            }
        }
        if (markerPlane) {
            const [sx, sy] = toScreen(markerPlane);
            this.markerPos = [sx, sy];
            ctx.strokeStyle = "#d62728";
            ctx.lineWidth = 2;
            ctx.beginPath();
            ctx.moveTo(sx - 8, sy);
            ctx.lineTo(sx + 8, sy);
            ctx.moveTo(sx, sy - 8);
            ctx.lineTo(sx, sy + 8);
            ctx.stroke();
        }
    }
    /** Nearest rendered point within `radius` px, for click selection. */
    hitTest(x, y, radius = 8) {
        let best = null;
        let bestD = radius * radius;
        for (const [id, [sx, sy]] of this.positions.entries()) {
            const d = (sx - x) ** 2 + (sy - y) ** 2;
            if (d <= bestD) {
                bestD = d;
                best = id;
            }
        }
        return best;
    }
    screenPosition(id) {
        return this.positions.get(id);
    }
    markerScreenPosition() {
        return this.markerPos;
    }
}
