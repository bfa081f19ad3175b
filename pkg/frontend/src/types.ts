// Payload shapes of the map service API. The client never recomputes any
// of these values; it only displays them and applies the view basis.

export interface MapMeta {
  dim: number;
  entry_count: number;
  provenance_hash: string;
  schema_version: number;
  api_version: number;
}

export interface ViewResponse {
  target_dim: 2 | 3;
  basis: number[][];
  center: number[];
  view_coords: Record<string, number[]>;
  labels: Record<string, string>;
}

export interface NeighborRecord {
  doc_id: string;
  distance: number;
  rank: number;
  /** The distance field exactly as serialized by the server. */
  distance_text: string;
}

export interface LocateResponse {
  coords: number[];
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}

export type HistoryEntry =
  | { kind: "view"; dim: 2 | 3 }
  | { kind: "select"; docId: string }
  | { kind: "locate"; text: string };
