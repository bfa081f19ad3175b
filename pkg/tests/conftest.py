import numpy as np
import pytest

from docmap.corpus import Document
from docmap.knowledge_map import KnowledgeMap
from docmap.som import Som


# Three-document reference corpus: term "xx" in every document, "yy" and
# "zz" in one each (terms are 2+ chars so the tokenizer keeps them).
THREE_DOCS = [
    Document(id="d1", text="xx yy"),
    Document(id="d2", text="xx zz"),
    Document(id="d3", text="xx"),
]


@pytest.fixture
def three_docs():
    return [Document(id=d.id, text=d.text) for d in THREE_DOCS]


def make_som(weights, axis_sizes, seed=0):
    weights = np.asarray(weights, dtype=np.float64)
    return Som(dim=len(axis_sizes), axis_sizes=tuple(axis_sizes), weights=weights, rng_seed=seed)


def random_map(n_entries, dim, seed, scale=10.0) -> KnowledgeMap:
    """Map with random coordinates and a token lattice; enough for query
    and persistence tests that never project."""
    rng = np.random.default_rng(seed)
    entries = {f"doc{i:03d}": rng.random(dim) * scale for i in range(n_entries)}
    som = Som(
        dim=dim,
        axis_sizes=(2,) * dim,
        weights=rng.random((2**dim, 4)),
        rng_seed=seed,
    )
    return KnowledgeMap(
        dim=dim,
        entries=entries,
        vocabulary_ref="",
        som_ref=som,
        provenance={"schema_version": 1, "seed": seed},
    )
