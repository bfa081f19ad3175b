export class ApiError extends Error {
    constructor(status, code, message) {
        super(message);
        this.status = status;
        this.code = code;
    }
}
async function readBody(res) {
    const raw = await res.text();
    if (!res.ok) {
        let code = "error";
        let message = `HTTP ${res.status}`;
        try {
            const body = JSON.parse(raw);
            code = body.error.code;
            message = body.error.message;
        }
        catch {
            // non-JSON error body; keep the generic message
        }
        throw new ApiError(res.status, code, message);
    }
    return raw;
}
async function asJson(res) {
    return JSON.parse(await readBody(res));
}
/**
 * Parse a neighbor list while keeping each distance exactly as the server
 * wrote it: the panel shows these bytes, never a re-serialized number.
 */
async function asNeighbors(res) {
    const raw = await readBody(res);
    const records = JSON.parse(raw);
    const tokens = [...raw.matchAll(/"distance":\s*([^,}\]]+)/g)];
    records.forEach((record, i) => {
        record.distance_text = tokens[i] ? tokens[i][1].trim() : String(record.distance);
    });
    return records;
}
/** Thin typed client over the read-only map endpoints. */
export class ApiClient {
    constructor(baseUrl = "") {
        this.baseUrl = baseUrl;
    }
    meta() {
        return fetch(`${this.baseUrl}/api/map/meta`).then((r) => asJson(r));
    }
    view(dim) {
        return fetch(`${this.baseUrl}/api/view?dim=${dim}`).then((r) => asJson(r));
    }
    neighborsById(docId, k) {
        const id = encodeURIComponent(docId);
        return fetch(`${this.baseUrl}/api/neighbors?id=${id}&k=${k}`).then(asNeighbors);
    }
    neighborsByCoords(coords, k) {
        const packed = encodeURIComponent(coords.join(","));
        return fetch(`${this.baseUrl}/api/neighbors?coords=${packed}&k=${k}`).then(asNeighbors);
    }
    locate(text) {
        return fetch(`${this.baseUrl}/api/locate`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ text }),
        }).then((r) => asJson(r));
    }
}
