import json
import math

import numpy as np
import pytest

from docmap.corpus import (
    CorpusConfig,
    Document,
    build_vocabulary,
    ingest_corpus,
    load_documents,
    tokenize,
    vectorize,
)
from docmap.errors import CorpusError, UnmappableTextError


class TestTokenize:
    def test_punctuation_and_case(self):
        assert tokenize("Knowledge, Representation!") == ["knowledge", "representation"]

    def test_empty(self):
        assert tokenize("") == []

    def test_short_tokens_dropped(self):
        # "a" and "3" fall under the 2-character floor; the hyphen splits.
        assert tokenize("a BX-3 map") == ["bx", "map"]

    def test_unicode_words(self):
        assert tokenize("Café déjà-vu") == ["café", "déjà", "vu"]

    def test_underscore_splits(self):
        assert tokenize("foo_bar") == ["foo", "bar"]


class TestBuildVocabulary:
    def test_order_descending_df_ties_lexicographic(self, three_docs):
        vocab = build_vocabulary(three_docs, min_df=1, max_df_ratio=1.0)
        assert vocab.terms == ["xx", "yy", "zz"]
        assert vocab.document_frequency == [3, 1, 1]
        assert vocab.corpus_size == 3

    def test_max_df_ratio_excludes_ubiquitous(self, three_docs):
        vocab = build_vocabulary(three_docs, max_df_ratio=0.9)
        assert "xx" not in vocab.terms
        assert vocab.terms == ["yy", "zz"]

    def test_min_df_unreachable(self):
        with pytest.raises(CorpusError, match="zero terms"):
            build_vocabulary([Document(id="d", text="solo words")], min_df=2)

    def test_max_terms_tie_break(self):
        docs = [Document(id="d", text="zz aa")]
        vocab = build_vocabulary(docs, max_terms=1)
        assert vocab.terms == ["aa"]

    def test_empty_corpus(self):
        with pytest.raises(CorpusError, match="non-empty"):
            build_vocabulary([])


class TestVectorize:
    def test_single_term_normalizes_to_one(self, three_docs):
        vocab = build_vocabulary(three_docs)
        fv = vectorize(Document(id="q", text="xx xx xx"), vocab)
        assert fv.entries == {0: 1.0}
        assert fv.l2_norm == pytest.approx(1.0)

    def test_identical_token_multisets(self, three_docs):
        vocab = build_vocabulary(three_docs)
        a = vectorize(Document(id="a", text="yy xx"), vocab)
        b = vectorize(Document(id="b", text="xx yy"), vocab)
        assert a.entries == b.entries

    def test_hand_computed_weights(self, three_docs):
        # Oracle: direct evaluation of tf * (ln((1+N)/(1+df)) + 1), L2-normalized.
        vocab = build_vocabulary(three_docs)
        fv = vectorize(three_docs[0], vocab)  # "xx yy"
        wx = 1.0 * (math.log(4 / 4) + 1.0)
        wy = 1.0 * (math.log(4 / 2) + 1.0)
        norm = math.sqrt(wx * wx + wy * wy)
        assert fv.entries[0] == pytest.approx(wx / norm, abs=1e-12)
        assert fv.entries[1] == pytest.approx(wy / norm, abs=1e-12)

    def test_unmappable_document(self, three_docs):
        vocab = build_vocabulary(three_docs)
        with pytest.raises(UnmappableTextError):
            vectorize(Document(id="q", text="nothing matches here"), vocab)


def write_txt_corpus(root, texts):
    for name, text in texts.items():
        (root / name).write_text(text, encoding="utf-8")


class TestIngest:
    def test_directory_of_txt(self, tmp_path):
        write_txt_corpus(tmp_path, {"a.txt": "xx yy", "b.txt": "xx zz", "c.txt": "xx"})
        result = ingest_corpus(tmp_path)
        assert result.vocabulary.terms == ["xx", "yy", "zz"]
        assert [fv.doc_id for fv in result.vectors] == ["a.txt", "b.txt", "c.txt"]
        assert result.unmappable_ids == []

    def test_empty_directory(self, tmp_path):
        with pytest.raises(CorpusError, match="non-empty"):
            ingest_corpus(tmp_path)

    def test_reingest_byte_identical(self, tmp_path):
        write_txt_corpus(tmp_path, {"a.txt": "xx yy", "b.txt": "xx zz", "c.txt": "xx"})
        first = ingest_corpus(tmp_path).serialize()
        second = ingest_corpus(tmp_path).serialize()
        assert first == second

    def test_jsonl_input_and_labels(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        lines = [
            {"id": "a", "text": "xx yy", "topic_label": "t0"},
            {"id": "b", "text": "xx zz"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in lines), encoding="utf-8")
        result = ingest_corpus(path)
        assert result.labels == {"a": "t0"}
        assert len(result.vectors) == 2

    def test_jsonl_malformed_line_reported(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "a", "text": "xx"}\nnot json\n', encoding="utf-8")
        with pytest.raises(CorpusError, match="line 2"):
            ingest_corpus(path)

    def test_jsonl_missing_field_reported(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "a"}\n', encoding="utf-8")
        with pytest.raises(CorpusError, match="line 1"):
            ingest_corpus(path)

    def test_duplicate_ids_rejected(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text(
            '{"id": "a", "text": "xx"}\n{"id": "a", "text": "yy"}\n', encoding="utf-8"
        )
        with pytest.raises(CorpusError, match="duplicate"):
            load_documents(path)

    def test_empty_text_is_malformed(self, tmp_path):
        write_txt_corpus(tmp_path, {"a.txt": "   "})
        with pytest.raises(CorpusError, match="empty"):
            ingest_corpus(tmp_path)

    def test_unmappable_reported_not_fatal(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        lines = [
            {"id": "a", "text": "xx yy"},
            {"id": "b", "text": "xx yy"},
            {"id": "solo", "text": "qq ww"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in lines), encoding="utf-8")
        result = ingest_corpus(path, CorpusConfig(min_df=2))
        assert result.unmappable_ids == ["solo"]
        assert [fv.doc_id for fv in result.vectors] == ["a", "b"]


class TestInvariants:
    def _random_docs(self, rng, n=30):
        words = [f"w{i}" for i in range(40)]
        docs = []
        for i in range(n):
            k = rng.integers(3, 12)
            text = " ".join(rng.choice(words, size=k))
            docs.append(Document(id=f"d{i:02d}", text=text))
        return docs

    def test_unit_norm_and_index_bounds(self):
        rng = np.random.default_rng(1)
        docs = self._random_docs(rng)
        vocab = build_vocabulary(docs)
        for doc in docs:
            fv = vectorize(doc, vocab)
            norm = math.sqrt(sum(w * w for w in fv.entries.values()))
            assert norm == pytest.approx(1.0, abs=1e-9)
            assert all(0 <= idx < len(vocab) for idx in fv.entries)

    def test_document_order_irrelevant(self):
        rng = np.random.default_rng(2)
        docs = self._random_docs(rng)
        vocab_a = build_vocabulary(docs)
        shuffled = list(docs)
        np.random.default_rng(3).shuffle(shuffled)
        vocab_b = build_vocabulary(shuffled)
        assert vocab_a.terms == vocab_b.terms
        assert vocab_a.document_frequency == vocab_b.document_frequency
        for doc in docs:
            assert vectorize(doc, vocab_a).entries == vectorize(doc, vocab_b).entries

    def test_vocabulary_hash_stable(self, three_docs):
        a = build_vocabulary(three_docs).content_hash()
        b = build_vocabulary(three_docs).content_hash()
        assert a == b and len(a) == 64
