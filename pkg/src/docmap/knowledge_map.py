"""The finished document map: coordinates, queries, views, persistence.

A KnowledgeMap stores one D-dimensional coordinate per document plus the
trained lattice that produced them, so new text can be placed into the
same frame at query time. Distance between stored coordinates is the
relevance measure; all queries are pure reads.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .corpus import Vocabulary, canonical_json, text_entries
from .errors import MapFileError, UnknownIdError
from .som import Som, project, stability_score

MAP_SCHEMA_VERSION = 1
_MAGIC = b"DMAP"


@dataclass
class NeighborResult:
    doc_id: str
    distance: float
    rank: int


@dataclass
class ViewProjection:
    """2-D or 3-D PCA view of the stored coordinates.

    ``basis`` rows are the principal directions (sign-fixed so each row's
    largest-magnitude element is positive); ``center`` is the mean that was
    subtracted. A D-dim point p maps into the view as (p - center) @ basis.T.
    """

    target_dim: int
    view_coords: dict[str, np.ndarray]
    basis: np.ndarray
    center: np.ndarray


@dataclass
class KnowledgeMap:
    dim: int
    entries: dict[str, np.ndarray]
    vocabulary_ref: str
    som_ref: Som
    provenance: dict
    annotations: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for doc_id, coords in self.entries.items():
            if coords.shape != (self.dim,):
                raise ValueError(f"entry {doc_id!r} has wrong coordinate length")
        if self.som_ref.dim != self.dim:
            raise ValueError("retained lattice dimensionality must equal map dim")

    def coordinate_matrix(self):
        """(ids, coords) in entry order."""
        ids = list(self.entries)
        coords = np.array([self.entries[i] for i in ids], dtype=np.float64)
        return ids, coords

    def bounding_box(self):
        _, coords = self.coordinate_matrix()
        return coords.min(axis=0), coords.max(axis=0)

    def coordinate_range(self) -> float:
        """Largest per-dimension coordinate extent; the scale reference for
        decoder error thresholds."""
        lo, hi = self.bounding_box()
        return float((hi - lo).max())


def build_map(
    soms,
    stability_reports,
    vectors,
    doc_ids,
    vocabulary_ref: str = "",
    provenance: dict | None = None,
    annotations: dict[str, str] | None = None,
) -> KnowledgeMap:
    """Pick the most mutually-consistent run and project every document.

    The retained run is the one whose mean pairwise stability against the
    other runs is highest (ties: lowest seed). When no usable report is
    supplied the scores are computed here from the documents themselves.
    """
    if not soms:
        raise ValueError("soms must be non-empty")
    dims = {som.dim for som in soms}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch across runs: {sorted(dims)}")
    data = np.asarray(vectors, dtype=np.float64)
    if data.shape[0] != len(doc_ids):
        raise ValueError("vectors and doc_ids must be aligned")

    if len(soms) == 1:
        chosen = 0
    else:
        pair_scores = _final_pair_scores(soms, stability_reports, data)
        per_run = []
        for r in range(len(soms)):
            scores = [s for i, j, s in pair_scores if r in (i, j)]
            per_run.append(float(np.mean(scores)))
        best = max(per_run)
        candidates = [r for r, m in enumerate(per_run) if m == best]
        chosen = min(candidates, key=lambda r: soms[r].rng_seed)

    som = soms[chosen]
    entries = {
        doc_id: project(som, data[i]) for i, doc_id in enumerate(doc_ids)
    }

    prov = dict(provenance or {})
    prov.setdefault("schema_version", MAP_SCHEMA_VERSION)
    prov["chosen_run"] = chosen
    prov["run_seeds"] = [int(s.rng_seed) for s in soms]
    prov["stability_reports"] = [r.to_dict() for r in stability_reports]
    return KnowledgeMap(
        dim=som.dim,
        entries=entries,
        vocabulary_ref=vocabulary_ref,
        som_ref=som,
        provenance=prov,
        annotations=dict(annotations or {}),
    )


def _final_pair_scores(soms, stability_reports, data):
    """Pairwise run scores from the last matching report, or recomputed
    over all documents when reports are absent."""
    if stability_reports:
        last = stability_reports[-1]
        if last.dim == soms[0].dim and last.pairwise_scores:
            return last.pairwise_scores
    coords = [
        np.array([project(som, row) for row in data]) for som in soms
    ]
    return [
        (i, j, stability_score(coords[i], coords[j]))
        for i in range(len(soms))
        for j in range(i + 1, len(soms))
    ]


def relevance(kmap: KnowledgeMap, id_a: str, id_b: str) -> float:
    """Euclidean distance between two stored documents."""
    for doc_id in (id_a, id_b):
        if doc_id not in kmap.entries:
            raise UnknownIdError(f"unknown document id: {doc_id!r}")
    return float(np.linalg.norm(kmap.entries[id_a] - kmap.entries[id_b]))


def neighbors(kmap: KnowledgeMap, query, k: int) -> list[NeighborResult]:
    """k nearest stored documents by Euclidean distance.

    ``query`` is either a stored doc id (which is itself excluded from the
    results) or a raw coordinate vector of length dim. Ordering is fully
    deterministic: ascending distance, ties by doc id.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if isinstance(query, str):
        if query not in kmap.entries:
            raise UnknownIdError(f"unknown document id: {query!r}")
        point = kmap.entries[query]
        exclude = query
    else:
        point = np.asarray(query, dtype=np.float64)
        if point.shape != (kmap.dim,):
            raise ValueError(f"query coordinates must have length {kmap.dim}")
        exclude = None

    ids, coords = kmap.coordinate_matrix()
    dists = np.linalg.norm(coords - point, axis=1)
    ranked = sorted(
        (
            (float(d), doc_id)
            for doc_id, d in zip(ids, dists)
            if doc_id != exclude
        ),
        key=lambda t: (t[0], t[1]),
    )
    return [
        NeighborResult(doc_id=doc_id, distance=d, rank=r + 1)
        for r, (d, doc_id) in enumerate(ranked[:k])
    ]


def locate_text(kmap: KnowledgeMap, text: str, vocab: Vocabulary) -> np.ndarray:
    """Place raw text into the map: vectorize under the map's vocabulary and
    project through the retained lattice.

    Raises UnmappableTextError for text with no in-vocabulary terms and
    ValueError when the vocabulary does not match the map's reference hash.
    """
    if kmap.vocabulary_ref and vocab.content_hash() != kmap.vocabulary_ref:
        raise ValueError("vocabulary does not match the map's vocabulary reference")
    entries = text_entries(text, vocab)
    vec = np.zeros(len(vocab), dtype=np.float64)
    for idx, w in entries.items():
        vec[idx] = w
    return project(kmap.som_ref, vec)


def project_to_view(kmap: KnowledgeMap, target_dim: int) -> ViewProjection:
    """PCA view of the stored coordinates in 2 or 3 dimensions.

    Deterministic sign convention: each basis row is flipped so its
    largest-magnitude element is positive.
    """
    if target_dim not in (2, 3):
        raise ValueError("target_dim must be 2 or 3")
    if len(kmap.entries) < target_dim + 1:
        raise ValueError(f"need at least {target_dim + 1} entries for a {target_dim}-d view")

    ids, coords = kmap.coordinate_matrix()
    center = coords.mean(axis=0)
    centered = coords - center
    _, _, vt = np.linalg.svd(centered, full_matrices=True)
    basis = vt[:target_dim]
    for row in basis:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    view = centered @ basis.T
    return ViewProjection(
        target_dim=target_dim,
        view_coords={doc_id: view[i] for i, doc_id in enumerate(ids)},
        basis=basis,
        center=center,
    )


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise MapFileError("corrupt", "unexpected end of map file")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self.take(8))[0]

    def string(self) -> str:
        return self.take(self.u32()).decode("utf-8")


def _som_payload(som: Som) -> bytes:
    parts = [struct.pack("<I", som.dim)]
    parts.append(struct.pack(f"<{som.dim}I", *som.axis_sizes))
    parts.append(struct.pack("<I", som.n_features))
    parts.append(struct.pack("<q", int(som.rng_seed)))
    parts.append(_pack_str(canonical_json(som.training_log)))
    parts.append(np.ascontiguousarray(som.weights, dtype="<f8").tobytes())
    return b"".join(parts)


def save_map(kmap: KnowledgeMap, path) -> None:
    """Write the canonical binary map file.

    Layout (little-endian): magic "DMAP", u32 schema version, u32 dim,
    u64 entry count, 32-byte SHA-256 of the payload; payload = vocabulary
    hash string, provenance JSON string, annotations JSON string, entry
    table (length-prefixed doc id + dim float64 coordinates each), then the
    lattice block (u32 dim, per-axis u32 sizes, u32 feature count, i64 seed,
    training-log JSON string, raw float64 node weights). All strings are
    u32-length-prefixed UTF-8.
    """
    parts = [
        _pack_str(kmap.vocabulary_ref),
        _pack_str(canonical_json(kmap.provenance)),
        _pack_str(canonical_json(kmap.annotations)),
    ]
    for doc_id, coords in kmap.entries.items():
        parts.append(_pack_str(doc_id))
        parts.append(np.ascontiguousarray(coords, dtype="<f8").tobytes())
    parts.append(_som_payload(kmap.som_ref))
    payload = b"".join(parts)

    header = _MAGIC + struct.pack(
        "<IIQ", MAP_SCHEMA_VERSION, kmap.dim, len(kmap.entries)
    )
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as fh:
        fh.write(header + digest + payload)


def load_map(path) -> KnowledgeMap:
    """Read a binary map file; exact inverse of save_map.

    Raises MapFileError with kind "version" for a newer schema, "checksum"
    for payload corruption or truncation, "corrupt" for structural damage.
    """
    raw = open(path, "rb").read()
    if len(raw) < 4 + 16 + 32 or raw[:4] != _MAGIC:
        raise MapFileError("corrupt", "not a map file (bad magic or header)")
    version, dim, entry_count = struct.unpack("<IIQ", raw[4:20])
    if version > MAP_SCHEMA_VERSION:
        raise MapFileError(
            "version",
            f"map file schema version {version} is newer than supported {MAP_SCHEMA_VERSION}",
        )
    digest = raw[20:52]
    payload = raw[52:]
    if hashlib.sha256(payload).digest() != digest:
        raise MapFileError("checksum", "map file checksum mismatch (corrupt or truncated)")

    r = _Reader(payload)
    vocabulary_ref = r.string()
    provenance = json.loads(r.string())
    annotations = json.loads(r.string())
    entries = {}
    for _ in range(entry_count):
        doc_id = r.string()
        coords = np.frombuffer(r.take(8 * dim), dtype="<f8").astype(np.float64)
        entries[doc_id] = coords

    som_dim = r.u32()
    axis_sizes = struct.unpack(f"<{som_dim}I", r.take(4 * som_dim))
    n_features = r.u32()
    rng_seed = r.i64()
    training_log = json.loads(r.string())
    n_nodes = int(np.prod(axis_sizes))
    weights = (
        np.frombuffer(r.take(8 * n_nodes * n_features), dtype="<f8")
        .astype(np.float64)
        .reshape(n_nodes, n_features)
    )
    som = Som(
        dim=som_dim,
        axis_sizes=axis_sizes,
        weights=weights,
        rng_seed=rng_seed,
        training_log=training_log,
    )
    return KnowledgeMap(
        dim=dim,
        entries=entries,
        vocabulary_ref=vocabulary_ref,
        som_ref=som,
        provenance=provenance,
        annotations=annotations,
    )


def map_to_debug_dict(kmap: KnowledgeMap) -> dict:
    """JSON-friendly dump of every field; the binary file stays canonical."""
    return {
        "schema_version": MAP_SCHEMA_VERSION,
        "dim": kmap.dim,
        "vocabulary_ref": kmap.vocabulary_ref,
        "provenance": kmap.provenance,
        "annotations": kmap.annotations,
        "entries": {doc_id: [float(x) for x in c] for doc_id, c in kmap.entries.items()},
        "som": {
            "dim": kmap.som_ref.dim,
            "axis_sizes": list(kmap.som_ref.axis_sizes),
            "rng_seed": int(kmap.som_ref.rng_seed),
            "training_log": kmap.som_ref.training_log,
            "weights": [[float(x) for x in row] for row in kmap.som_ref.weights],
        },
    }


def save_map_json(kmap: KnowledgeMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(map_to_debug_dict(kmap), fh, sort_keys=True, indent=1)
