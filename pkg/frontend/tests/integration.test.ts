/**
 * Live browsing-loop checks against a served map (criterion: sub-200ms
 * median select->neighbors round trip on a 10k-entry map, distances shown
 * byte-equal to the API payload, locate marker coinciding with the stored
 * document's rendered point).
 *
 * Skipped unless DOCMAP_URL points at a running service; DOCMAP_CORPUS
 * must name the JSON-lines corpus the served map was built from so the
 * locate check can replay stored documents' text.
 *
 *   DOCMAP_URL=http://127.0.0.1:8000 DOCMAP_CORPUS=/tmp/demo.jsonl npm test
 */
import { readFileSync } from "fs";
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { applyBasis, BrowseState } from "../src/state.js";

const BASE = process.env.DOCMAP_URL;
const CORPUS = process.env.DOCMAP_CORPUS;
const live = BASE ? describe : describe.skip;

function median(xs: number[]): number {
  const s = [...xs].sort((a, b) => a - b);
  const mid = Math.floor(s.length / 2);
  return s.length % 2 ? s[mid] : (s[mid - 1] + s[mid]) / 2;
}

live("live browsing loop", () => {
  const api = new ApiClient(BASE!);

  it("select->neighbors round trips under 200ms median", async () => {
    const meta = await api.meta();
    expect(meta.entry_count).toBeGreaterThanOrEqual(10_000);

    const state = new BrowseState(api);
    await state.loadView(2);
    const ids = Object.keys(state.view!.view_coords);
    const times: number[] = [];
    for (let i = 0; i < 40; i++) {
      const id = ids[(i * 997) % ids.length];
      const t0 = performance.now();
      await state.selectDoc(id);
      times.push(performance.now() - t0);
      expect(state.selected).toBe(id);
      expect(state.neighbors.length).toBe(state.k);
    }
    const med = median(times);
    console.log(`select->neighbors median ${med.toFixed(1)}ms over ${times.length} hops`);
    expect(med).toBeLessThan(200);
  }, 60_000);

  it("panel distances are byte-equal to the API payload", async () => {
    const state = new BrowseState(api);
    await state.loadView(2);
    const id = Object.keys(state.view!.view_coords)[0];

    const raw = await fetch(
      `${BASE}/api/neighbors?id=${encodeURIComponent(id)}&k=10`,
    ).then((r) => r.text());
    const rawDistances = [...raw.matchAll(/"distance":([^,}]+)/g)].map((m) => m[1]);

    await state.selectDoc(id);
    const shown = state.neighbors.map((n) => n.distance_text);
    expect(shown).toEqual(rawDistances);
  }, 30_000);

  it("locate marker coincides with the stored document's point", async () => {
    if (!CORPUS) return; // corpus file required for stored text
    const lines = readFileSync(CORPUS, "utf-8").trim().split("\n");
    const state = new BrowseState(api);
    await state.loadView(2);

    for (const line of [lines[0], lines[Math.floor(lines.length / 2)]]) {
      const doc = JSON.parse(line) as { id: string; text: string };
      await state.locateQuery(doc.text);
      expect(state.marker).not.toBeNull();
      const rendered = state.view!.view_coords[doc.id];
      const marker = state.marker!.viewCoords;
      for (let i = 0; i < rendered.length; i++) {
        expect(Math.abs(marker[i] - rendered[i])).toBeLessThan(1e-9);
      }
    }
  }, 30_000);
});
