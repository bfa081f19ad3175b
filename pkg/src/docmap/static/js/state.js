import { ApiError } from "./api.js";
/**
 * Project a full-dimensional map point into the current view frame:
 * (p - center) . basis_row for each basis row. This is the only numeric
 * work the client performs; everything else is displayed verbatim.
 */
export function applyBasis(coords, basis, center) {
    return basis.map((row) => {
        let sum = 0;
        for (let i = 0; i < row.length; i++) {
            sum += (coords[i] - center[i]) * row[i];
        }
        return sum;
    });
}
function describeError(err) {
    if (err instanceof ApiError) {
        return err.code === "unmappable" ? "unmappable query" : err.message;
    }
    return err instanceof Error ? err.message : String(err);
}
/**
 * All browsing state: the loaded view, current selection, neighbor panel,
 * query marker, camera, and the append-only session history. Requests are
 * sequence-numbered per interaction class so a stale response (superseded
 * by a newer hop) is discarded instead of clobbering newer state.
 */
export class BrowseState {
    constructor(api) {
        this.api = api;
        this.view = null;
        this.targetDim = 2;
        this.selected = null;
        this.neighbors = [];
        this.marker = null;
        this.k = 10;
        this.history = [];
        this.camera = { yaw: 0.5, pitch: 0.4, zoom: 1, panX: 0, panY: 0 };
        this.error = null;
        this.onChange = null;
        this.viewSeq = 0;
        this.browseSeq = 0;
    }
    changed() {
        this.onChange?.();
    }
    async loadView(dim) {
        const token = ++this.viewSeq;
        try {
            const view = await this.api.view(dim);
            if (token !== this.viewSeq)
                return;
            this.view = view;
            this.targetDim = dim;
            this.error = null;
            this.history.push({ kind: "view", dim });
            if (this.selected !== null && !(this.selected in view.view_coords)) {
                this.selected = null;
                this.neighbors = [];
            }
            if (this.marker !== null) {
                this.marker = {
                    ...this.marker,
                    viewCoords: applyBasis(this.marker.coords, view.basis, view.center),
                };
            }
        }
        catch (err) {
            if (token === this.viewSeq)
                this.error = describeError(err);
        }
        this.changed();
    }
    async selectDoc(docId) {
        if (this.view === null || !(docId in this.view.view_coords)) {
            this.error = `document not in the loaded view: ${docId}`;
            this.changed();
            return;
        }
        const token = ++this.browseSeq;
        try {
            const neighbors = await this.api.neighborsById(docId, this.k);
            if (token !== this.browseSeq)
                return;
            this.selected = docId;
            this.neighbors = neighbors;
            this.marker = null;
            this.error = null;
            this.history.push({ kind: "select", docId });
        }
        catch (err) {
            if (token === this.browseSeq)
                this.error = describeError(err);
        }
        this.changed();
    }
    async locateQuery(text) {
        if (this.view === null) {
            this.error = "no view loaded";
            this.changed();
            return;
        }
        const token = ++this.browseSeq;
        try {
            const located = await this.api.locate(text);
            const neighbors = await this.api.neighborsByCoords(located.coords, this.k);
            if (token !== this.browseSeq)
                return;
            this.marker = {
                text,
                coords: located.coords,
                viewCoords: applyBasis(located.coords, this.view.basis, this.view.center),
            };
            this.selected = null;
            this.neighbors = neighbors;
            this.error = null;
            this.history.push({ kind: "locate", text });
        }
        catch (err) {
            if (token === this.browseSeq)
                this.error = describeError(err);
        }
        this.changed();
    }
    /** Query-relevant state; camera excluded (mouse motion is not replayed). */
    snapshot() {
        return {
            targetDim: this.targetDim,
            selected: this.selected,
            neighbors: this.neighbors,
            marker: this.marker,
            error: this.error,
            history: this.history,
            viewIds: this.view === null ? [] : Object.keys(this.view.view_coords),
        };
    }
}
/**
 * Re-run a recorded session against the (deterministic, read-only)
 * service; yields a state identical to the one the session ended with.
 */
export async function replaySession(api, history, k = 10) {
    const state = new BrowseState(api);
    state.k = k;
    for (const entry of history) {
        if (entry.kind === "view")
            await state.loadView(entry.dim);
        else if (entry.kind === "select")
            await state.selectDoc(entry.docId);
        else
            await state.locateQuery(entry.text);
    }
    return state;
}
