"""Document ingestion and the vector space model.

Turns raw documents into L2-normalized sparse tf-idf vectors over a
document-frequency-filtered vocabulary. These vectors are the points that
the mapping stage projects into the low-dimensional space.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorpusError, UnmappableTextError

CORPUS_SCHEMA_VERSION = 1

# Unicode letters/digits only; underscore and punctuation split tokens.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_MIN_TOKEN_LEN = 2


@dataclass
class Document:
    """One input document. ``topic_label`` is ground truth for synthetic
    corpora and is never consulted while building the space."""

    id: str
    text: str
    source_uri: str | None = None
    topic_label: str | None = None


@dataclass
class Vocabulary:
    """Ordered term list defining the feature axes.

    Order is descending document frequency, ties lexicographic, and is the
    stable axis indexing every FeatureVector refers to.
    """

    terms: list[str]
    document_frequency: list[int]
    corpus_size: int
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self):
        return len(self.terms)

    def content_hash(self) -> str:
        """SHA-256 over the canonical JSON form; identifies this vocabulary."""
        payload = canonical_json(
            {
                "terms": self.terms,
                "document_frequency": self.document_frequency,
                "corpus_size": self.corpus_size,
            }
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "document_frequency": list(self.document_frequency),
            "corpus_size": self.corpus_size,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(
            terms=list(data["terms"]),
            document_frequency=[int(x) for x in data["document_frequency"]],
            corpus_size=int(data["corpus_size"]),
        )


@dataclass
class FeatureVector:
    """Sparse L2-normalized tf-idf vector for one document."""

    doc_id: str
    entries: dict[int, float]
    l2_norm: float

    def to_dense(self, size: int) -> np.ndarray:
        vec = np.zeros(size, dtype=np.float64)
        for idx, w in self.entries.items():
            vec[idx] = w
        return vec


@dataclass
class CorpusConfig:
    """Feature-selection knobs. ``max_terms`` caps the vector size."""

    min_df: int = 1
    max_df_ratio: float = 1.0
    max_terms: int = 2000


def canonical_json(obj) -> str:
    """Deterministic JSON used for hashing and serialized outputs."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-letter/non-digit boundary.

    Tokens shorter than 2 characters are dropped. Empty text gives [].
    """
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= _MIN_TOKEN_LEN]


def build_vocabulary(
    docs: list[Document],
    min_df: int = 1,
    max_df_ratio: float = 1.0,
    max_terms: int = 2000,
) -> Vocabulary:
    """Select feature terms by document frequency.

    Keeps terms with df >= min_df and df/corpus_size <= max_df_ratio. If
    more than max_terms survive, the max_terms highest-df terms are kept
    (ties broken lexicographically). Raises CorpusError when the corpus is
    empty or no term survives filtering.
    """
    if not docs:
        raise CorpusError("docs non-empty violated: corpus has no documents")
    if not (0.0 < max_df_ratio <= 1.0):
        raise CorpusError(f"max_df_ratio must be in (0, 1], got {max_df_ratio}")
    if min_df < 1:
        raise CorpusError(f"min_df must be >= 1, got {min_df}")

    n = len(docs)
    df: dict[str, int] = {}
    for doc in docs:
        for term in set(tokenize(doc.text)):
            df[term] = df.get(term, 0) + 1

    kept = [
        (term, count)
        for term, count in df.items()
        if count >= min_df and count / n <= max_df_ratio
    ]
    if not kept:
        raise CorpusError("zero terms survive filtering")

    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    kept = kept[:max_terms]
    return Vocabulary(
        terms=[t for t, _ in kept],
        document_frequency=[c for _, c in kept],
        corpus_size=n,
    )


def text_entries(text: str, vocab: Vocabulary) -> dict[int, float]:
    """Sparse normalized tf-idf entries for raw text under ``vocab``.

    weight(t) = tf(t) * (ln((1 + corpus_size) / (1 + df(t))) + 1), then the
    whole vector is L2-normalized. Raises UnmappableTextError when no token
    is in the vocabulary.
    """
    counts: dict[int, int] = {}
    for token in tokenize(text):
        idx = vocab.index.get(token)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        raise UnmappableTextError("text has no in-vocabulary terms")

    n = vocab.corpus_size
    entries = {
        idx: tf * (math.log((1.0 + n) / (1.0 + vocab.document_frequency[idx])) + 1.0)
        for idx, tf in counts.items()
    }
    norm = math.sqrt(sum(w * w for w in entries.values()))
    return {idx: w / norm for idx, w in entries.items()}


def vectorize(doc: Document, vocab: Vocabulary) -> FeatureVector:
    """tf-idf vector for one document; raises UnmappableTextError when the
    document shares no term with the vocabulary."""
    try:
        entries = text_entries(doc.text, vocab)
    except UnmappableTextError:
        raise UnmappableTextError(f"document {doc.id!r} has no in-vocabulary terms")
    norm = math.sqrt(sum(w * w for w in entries.values()))
    return FeatureVector(doc_id=doc.id, entries=entries, l2_norm=norm)


@dataclass
class IngestResult:
    """Everything produced by one corpus pass."""

    vocabulary: Vocabulary
    vectors: list[FeatureVector]
    unmappable_ids: list[str]
    labels: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "schema_version": CORPUS_SCHEMA_VERSION,
            "vocabulary": self.vocabulary.to_dict(),
            "vectors": [
                {
                    "doc_id": fv.doc_id,
                    "indices": sorted(fv.entries),
                    "weights": [fv.entries[i] for i in sorted(fv.entries)],
                }
                for fv in self.vectors
            ],
            "unmappable": list(self.unmappable_ids),
            "labels": dict(self.labels),
        }

    def serialize(self) -> str:
        return canonical_json(self.to_dict())

    def save(self, path) -> None:
        Path(path).write_text(self.serialize(), encoding="utf-8")


def load_documents(path) -> list[Document]:
    """Read a corpus from disk.

    Two layouts are accepted: a directory of ``*.txt`` files (id = relative
    filename) or a JSON-lines file with ``id``, ``text`` and optional
    ``topic_label`` / ``source_uri`` per line. Malformed records raise
    CorpusError naming the offending file or line.
    """
    p = Path(path)
    if not p.exists():
        raise CorpusError(f"corpus path does not exist: {p}")

    docs: list[Document] = []
    if p.is_dir():
        for txt in sorted(p.rglob("*.txt")):
            rel = txt.relative_to(p).as_posix()
            text = txt.read_text(encoding="utf-8")
            if not text.strip():
                raise CorpusError(f"malformed record {rel}: text is empty")
            docs.append(Document(id=rel, text=text, source_uri=str(txt)))
    else:
        with open(p, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"malformed record at line {lineno}: {exc}") from exc
                if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
                    raise CorpusError(f"malformed record at line {lineno}: need id and text")
                if not str(rec["id"]):
                    raise CorpusError(f"malformed record at line {lineno}: id is empty")
                if not str(rec["text"]).strip():
                    raise CorpusError(f"malformed record at line {lineno}: text is empty")
                docs.append(
                    Document(
                        id=str(rec["id"]),
                        text=str(rec["text"]),
                        source_uri=rec.get("source_uri"),
                        topic_label=rec.get("topic_label"),
                    )
                )

    seen = set()
    for doc in docs:
        if doc.id in seen:
            raise CorpusError(f"duplicate document id: {doc.id!r}")
        seen.add(doc.id)
    return docs


def ingest_corpus(path, config: CorpusConfig | None = None) -> IngestResult:
    """Full corpus pass: load, build vocabulary, vectorize every document.

    Documents with no in-vocabulary term are reported in
    ``unmappable_ids`` and excluded from the vectors; they are not fatal.
    Output vector order is sorted by doc id so the result is independent of
    input listing order.
    """
    config = config or CorpusConfig()
    docs = load_documents(path)
    vocab = build_vocabulary(
        docs,
        min_df=config.min_df,
        max_df_ratio=config.max_df_ratio,
        max_terms=config.max_terms,
    )

    vectors = []
    unmappable = []
    for doc in docs:
        try:
            vectors.append(vectorize(doc, vocab))
        except UnmappableTextError:
            unmappable.append(doc.id)
    vectors.sort(key=lambda fv: fv.doc_id)
    unmappable.sort()

    labels = {d.id: d.topic_label for d in docs if d.topic_label is not None}
    return IngestResult(
        vocabulary=vocab, vectors=vectors, unmappable_ids=unmappable, labels=labels
    )
