import { ApiError } from "./api.js";
import type { HistoryEntry, NeighborRecord, ViewResponse } from "./types.js";

// The browse loop only needs this slice of the client.
export interface BrowseApi {
  view(dim: 2 | 3): Promise<ViewResponse>;
  neighborsById(docId: string, k: number): Promise<NeighborRecord[]>;
  neighborsByCoords(coords: number[], k: number): Promise<NeighborRecord[]>;
  locate(text: string): Promise<{ coords: number[] }>;
}

export interface Marker {
  text: string;
  coords: number[];
  viewCoords: number[];
}

export interface Camera {
  yaw: number;
  pitch: number;
  zoom: number;
  panX: number;
  panY: number;
}

/**
 * Project a full-dimensional map point into the current view frame:
 * (p - center) . basis_row for each basis row. This is the only numeric
 * work the client performs; everything else is displayed verbatim.
 */
export function applyBasis(
  coords: number[],
  basis: number[][],
  center: number[],
): number[] {
  return basis.map((row) => {
    let sum = 0;
    for (let i = 0; i < row.length; i++) {
      sum += (coords[i] - center[i]) * row[i];
    }
    return sum;
  });
}

function describeError(err: unknown): string {
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
  view: ViewResponse | null = null;
  targetDim: 2 | 3 = 2;
  selected: string | null = null;
  neighbors: NeighborRecord[] = [];
  marker: Marker | null = null;
  k = 10;
  history: HistoryEntry[] = [];
  camera: Camera = { yaw: 0.5, pitch: 0.4, zoom: 1, panX: 0, panY: 0 };
  error: string | null = null;
  onChange: (() => void) | null = null;

  private viewSeq = 0;
  private browseSeq = 0;

  constructor(private api: BrowseApi) {}

  private changed(): void {
    this.onChange?.();
  }

  async loadView(dim: 2 | 3): Promise<void> {
    const token = ++this.viewSeq;
    try {
      const view = await this.api.view(dim);
      if (token !== this.viewSeq) return;
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
    } catch (err) {
      if (token === this.viewSeq) this.error = describeError(err);
    }
    this.changed();
  }

  async selectDoc(docId: string): Promise<void> {
    if (this.view === null || !(docId in this.view.view_coords)) {
      this.error = `document not in the loaded view: ${docId}`;
      this.changed();
      return;
    }
    const token = ++this.browseSeq;
    try {
      const neighbors = await this.api.neighborsById(docId, this.k);
      if (token !== this.browseSeq) return;
      this.selected = docId;
      this.neighbors = neighbors;
      this.marker = null;
      this.error = null;
      this.history.push({ kind: "select", docId });
    } catch (err) {
      if (token === this.browseSeq) this.error = describeError(err);
    }
    this.changed();
  }

  async locateQuery(text: string): Promise<void> {
    if (this.view === null) {
      this.error = "no view loaded";
      this.changed();
      return;
    }
    const token = ++this.browseSeq;
    try {
      const located = await this.api.locate(text);
      const neighbors = await this.api.neighborsByCoords(located.coords, this.k);
      if (token !== this.browseSeq) return;
      this.marker = {
        text,
        coords: located.coords,
        viewCoords: applyBasis(located.coords, this.view.basis, this.view.center),
      };
      this.selected = null;
      this.neighbors = neighbors;
      this.error = null;
      this.history.push({ kind: "locate", text });
    } catch (err) {
      if (token === this.browseSeq) this.error = describeError(err);
    }
    this.changed();
  }

  /** Query-relevant state; camera excluded (mouse motion is not replayed). */
  snapshot(): object {
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
export async function replaySession(
  api: BrowseApi,
  history: HistoryEntry[],
  k = 10,
): Promise<BrowseState> {
  const state = new BrowseState(api);
  state.k = k;
  for (const entry of history) {
    if (entry.kind === "view") await state.loadView(entry.dim);
    else if (entry.kind === "select") await state.selectDoc(entry.docId);
    else await state.locateQuery(entry.text);
  }
  return state;
}
