import json

import numpy as np
import pytest

from docmap.cli import main
from docmap.knowledge_map import load_map, neighbors
from synth import topic_corpus

LIGHT_FLAGS = [
    "--nodes-per-axis", "3",
    "--epochs-per-phase", "4",
    "--parallel-runs", "2",
    "--max-dim", "3",
    "--probe-size", "12",
    "--stability-threshold", "0.8",
    "--neighborhood-radius", "2.0,0.5",
    "--seed", "3",
]


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    path = root / "docs.jsonl"
    docs = topic_corpus(n_docs=60, n_topics=6, tokens_per_doc=300, seed=5)
    lines = [
        json.dumps({"id": d.id, "text": d.text, "topic_label": d.topic_label})
        for d in docs
    ]
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def built_map(small_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("maps") / "small.map"
    code = main(["build", str(small_corpus), "--out", str(out), *LIGHT_FLAGS])
    assert code == 0
    return out


def run_json(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured


class TestBuild:
    def test_success_and_provenance(self, built_map):
        assert built_map.exists()
        kmap = load_map(built_map)
        assert "min_dimension" in kmap.provenance["jl_bound"]
        assert kmap.provenance["intrinsic_dim"]["value"] >= 1
        assert kmap.provenance["stability_reports"]
        assert (built_map.parent / (built_map.name + ".vocab.json")).exists()
        assert (built_map.parent / (built_map.name + ".phases.jsonl")).exists()

    def test_missing_corpus_path(self, tmp_path, capsys):
        code, captured = run_json(
            capsys, ["build", str(tmp_path / "nope"), "--out", str(tmp_path / "o.map")]
        )
        assert code != 0
        record = json.loads(captured.err.strip().splitlines()[-1])
        assert "nope" in record["error"]["message"]

    def test_deterministic_rebuild(self, small_corpus, tmp_path):
        a = tmp_path / "a.map"
        b = tmp_path / "b.map"
        assert main(["build", str(small_corpus), "--out", str(a), *LIGHT_FLAGS]) == 0
        assert main(["build", str(small_corpus), "--out", str(b), *LIGHT_FLAGS]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestQuery:
    def test_neighbors_matches_library(self, built_map, capsys):
        kmap = load_map(built_map)
        doc_id = next(iter(kmap.entries))
        code, captured = run_json(
            capsys,
            ["query", "neighbors", "--map", str(built_map), "--id", doc_id, "--k", "3"],
        )
        assert code == 0
        got = json.loads(captured.out)
        expected = neighbors(kmap, doc_id, 3)
        assert [g["doc_id"] for g in got] == [e.doc_id for e in expected]
        assert [g["distance"] for g in got] == [e.distance for e in expected]

    def test_relevance_self_is_zero(self, built_map, capsys):
        kmap = load_map(built_map)
        doc_id = next(iter(kmap.entries))
        code, captured = run_json(
            capsys,
            ["query", "relevance", "--map", str(built_map), "--a", doc_id, "--b", doc_id],
        )
        assert code == 0
        assert json.loads(captured.out)["distance"] == 0.0

    def test_locate_stored_document(self, built_map, small_corpus, capsys):
        kmap = load_map(built_map)
        records = [json.loads(l) for l in small_corpus.read_text().splitlines()]
        code, captured = run_json(
            capsys,
            ["query", "locate", "--map", str(built_map), "--text", records[0]["text"]],
        )
        assert code == 0
        coords = json.loads(captured.out)["coords"]
        assert coords == [float(x) for x in kmap.entries[records[0]["id"]]]

    def test_view_output(self, built_map, capsys):
        code, captured = run_json(
            capsys, ["query", "view", "--map", str(built_map), "--dim", "2"]
        )
        assert code == 0
        view = json.loads(captured.out)
        assert view["target_dim"] == 2
        assert len(view["basis"]) == 2

    def test_unknown_id_structured_error(self, built_map, capsys):
        code, captured = run_json(
            capsys,
            ["query", "relevance", "--map", str(built_map), "--a", "ghost", "--b", "ghost"],
        )
        assert code != 0
        record = json.loads(captured.err.strip().splitlines()[-1])
        assert record["error"]["type"] == "UnknownIdError"


class TestDims:
    def test_jl(self, capsys):
        code, captured = run_json(capsys, ["dims", "jl", "--m", "20000", "--epsilon", "0.1"])
        assert code == 0
        assert json.loads(captured.out)["min_dimension"] == 7923

    def test_pca_on_corpus_json(self, built_map, capsys):
        vocab_path = built_map.parent / (built_map.name + ".vocab.json")
        code, captured = run_json(
            capsys, ["dims", "pca", "--input", str(vocab_path), "--threshold", "0.95"]
        )
        assert code == 0
        out = json.loads(captured.out)
        assert out["intrinsic_dim"] >= 1

    def test_pca_on_plain_array(self, tmp_path, capsys):
        path = tmp_path / "vecs.json"
        rng = np.random.default_rng(0)
        data = (rng.random((50, 2)) @ rng.random((2, 6))).tolist()
        path.write_text(json.dumps(data))
        code, captured = run_json(capsys, ["dims", "pca", "--input", str(path), "--threshold", "0.99"])
        assert code == 0
        assert json.loads(captured.out)["intrinsic_dim"] == 2


class TestDecodeSim:
    def test_run_subcommand(self, built_map, tmp_path, capsys):
        log_path = tmp_path / "protocol.json"
        code, captured = run_json(
            capsys,
            [
                "decode-sim", "run",
                "--map", str(built_map),
                "--iterations", "300",
                "--eval-samples", "50",
                "--seed", "1",
                "--log", str(log_path),
            ],
        )
        assert code == 0
        out = json.loads(captured.out)
        assert out["iterations"] == 300
        assert out["holdout_rmse"] >= 0
        log = json.loads(log_path.read_text())
        assert len(log["records"]) == 300

    def test_pretrain_subcommand(self, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(
            json.dumps(
                {
                    "decode_sim": {
                        "voxels": 30,
                        "cohort_size": 3,
                        "holdout_subjects": 2,
                        "pretrain_samples_per_subject": 60,
                        "finetune_samples": 60,
                        "eval_samples": 40,
                        "pretrain_epochs": 10,
                        "max_epochs": 40,
                    }
                }
            )
        )
        curves = tmp_path / "curves.jsonl"
        summary = tmp_path / "summary.json"
        code, captured = run_json(
            capsys,
            [
                "decode-sim", "pretrain",
                "--config", str(config),
                "--seed", "2",
                "--curves", str(curves),
                "--summary", str(summary),
            ],
        )
        assert code == 0
        assert "median-epochs-to-threshold" in captured.out
        assert len(curves.read_text().strip().splitlines()) == 4  # 2 subjects x 2 arms
        data = json.loads(summary.read_text())
        assert {"median_pretrained_epochs", "median_scratch_epochs"} <= set(data)


class TestConfigFile:
    def test_toml_config(self, small_corpus, tmp_path):
        cfg = tmp_path / "build.toml"
        cfg.write_text(
            """
[som]
nodes_per_axis = 3
epochs_per_phase = 4
parallel_runs = 2
max_dim = 3
probe_size = 12
stability_threshold = 0.8
neighborhood_radius = [2.0, 0.5]
seed = 3
""",
            encoding="utf-8",
        )
        out = tmp_path / "t.map"
        assert main(["build", str(small_corpus), "--config", str(cfg), "--out", str(out)]) == 0
        assert out.exists()

    def test_seed_flag_overrides_config(self, small_corpus, tmp_path):
        out_a = tmp_path / "s7.map"
        out_b = tmp_path / "s8.map"
        flags = LIGHT_FLAGS[:-2]  # drop --seed 3
        assert main(["build", str(small_corpus), "--out", str(out_a), *flags, "--seed", "7"]) == 0
        assert main(["build", str(small_corpus), "--out", str(out_b), *flags, "--seed", "8"]) == 0
        assert load_map(out_a).provenance["seed"] == 7
        assert load_map(out_b).provenance["seed"] == 8
