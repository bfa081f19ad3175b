import type {
  ApiErrorBody,
  LocateResponse,
  MapMeta,
  NeighborRecord,
  ViewResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function readBody(res: Response): Promise<string> {
  const raw = await res.text();
  if (!res.ok) {
    let code = "error";
    let message = `HTTP ${res.status}`;
    try {
      const body = JSON.parse(raw) as ApiErrorBody;
      code = body.error.code;
      message = body.error.message;
    } catch {
      // non-JSON error body; keep the generic message
    }
    throw new ApiError(res.status, code, message);
  }
  return raw;
}

async function asJson<T>(res: Response): Promise<T> {
  return JSON.parse(await readBody(res)) as T;
}

/**
 * Parse a neighbor list while keeping each distance exactly as the server
 * wrote it: the panel shows these bytes, never a re-serialized number.
 */
async function asNeighbors(res: Response): Promise<NeighborRecord[]> {
  const raw = await readBody(res);
  const records = JSON.parse(raw) as NeighborRecord[];
  const tokens = [...raw.matchAll(/"distance":\s*([^,}\]]+)/g)];
  records.forEach((record, i) => {
    record.distance_text = tokens[i] ? tokens[i][1].trim() : String(record.distance);
  });
  return records;
}

/** Thin typed client over the read-only map endpoints. */
export class ApiClient {
  constructor(private baseUrl: string = "") {}

  meta(): Promise<MapMeta> {
    return fetch(`${this.baseUrl}/api/map/meta`).then((r) => asJson<MapMeta>(r));
  }

  view(dim: 2 | 3): Promise<ViewResponse> {
    return fetch(`${this.baseUrl}/api/view?dim=${dim}`).then((r) =>
      asJson<ViewResponse>(r),
    );
  }

  neighborsById(docId: string, k: number): Promise<NeighborRecord[]> {
    const id = encodeURIComponent(docId);
    return fetch(`${this.baseUrl}/api/neighbors?id=${id}&k=${k}`).then(asNeighbors);
  }

  neighborsByCoords(coords: number[], k: number): Promise<NeighborRecord[]> {
    const packed = encodeURIComponent(coords.join(","));
    return fetch(`${this.baseUrl}/api/neighbors?coords=${packed}&k=${k}`).then(asNeighbors);
  }

  locate(text: string): Promise<LocateResponse> {
    return fetch(`${this.baseUrl}/api/locate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    }).then((r) => asJson<LocateResponse>(r));
  }
}
