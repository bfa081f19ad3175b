"""Command-line front door: build maps, compute dimension estimates, run
decoder simulations, answer queries, and serve the HTTP API."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import CorpusConfig, Vocabulary, canonical_json, ingest_corpus
from .decoder import ProtocolConfig, make_cohort, protocol_features, rmse, run_protocol, synth_pattern
from .dimension import JlQuery, intrinsic_dimension_pca, jl_min_dimension
from .errors import DocmapError
from .experiments import (
    ExperimentConfig,
    format_summary_table,
    run_pretraining_experiment,
    write_experiment_outputs,
)
from .knowledge_map import (
    build_map,
    load_map,
    locate_text,
    neighbors,
    project_to_view,
    relevance,
    save_map,
    save_map_json,
)
from .som import SomConfig, derived_seed, incremental_evaluate

_EVAL_POINT_SALT = 401


def load_config_file(path) -> dict:
    p = Path(path)
    raw = p.read_bytes()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(raw.decode("utf-8"))
    return json.loads(raw.decode("utf-8"))


def _fail(stage: str, exc: Exception) -> int:
    record = {
        "error": {
            "stage": stage,
            "type": type(exc).__name__,
            "message": str(exc),
        }
    }
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return 1


def _override(obj, args, names):
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            setattr(obj, name, value)


def _pair(text: str) -> tuple[float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    return parts[0], parts[1]


def _vocab_sidecar(map_path) -> Path:
    return Path(str(map_path) + ".vocab.json")


def _load_vocab(args) -> Vocabulary:
    path = args.vocab or _vocab_sidecar(args.map)
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return Vocabulary.from_dict(data["vocabulary"])


def cmd_build(args) -> int:
    corpus_cfg = CorpusConfig()
    som_cfg = SomConfig()
    jl_epsilon = 0.1
    pca_threshold = 0.95

    if args.config:
        cfg = load_config_file(args.config)
        if "corpus" in cfg:
            corpus_cfg = CorpusConfig(**cfg["corpus"])
        if "som" in cfg:
            som_cfg = SomConfig.from_dict(cfg["som"])
        jl_epsilon = cfg.get("jl_epsilon", jl_epsilon)
        pca_threshold = cfg.get("pca_threshold", pca_threshold)

    _override(corpus_cfg, args, ["min_df", "max_df_ratio", "max_terms"])
    _override(
        som_cfg,
        args,
        [
            "initial_dim",
            "nodes_per_axis",
            "epochs_per_phase",
            "parallel_runs",
            "stability_threshold",
            "max_dim",
            "probe_size",
            "learning_rate",
            "neighborhood_radius",
        ],
    )
    if args.jl_epsilon is not None:
        jl_epsilon = args.jl_epsilon
    if args.pca_threshold is not None:
        pca_threshold = args.pca_threshold
    if args.seed is not None:
        som_cfg.seed = args.seed

    result = ingest_corpus(args.corpus, corpus_cfg)
    # Tiny corpora: the probe subset cannot exceed the corpus.
    som_cfg.probe_size = max(3, min(som_cfg.probe_size, len(result.vectors)))
    som_cfg.validate()

    doc_ids = [fv.doc_id for fv in result.vectors]
    data = np.array([fv.to_dense(len(result.vocabulary)) for fv in result.vectors])

    jl_bound = jl_min_dimension(JlQuery(m=len(doc_ids), epsilon=jl_epsilon))
    estimate = intrinsic_dimension_pca(data, pca_threshold)

    phases_path = Path(str(args.out) + ".phases.jsonl")
    with open(phases_path, "w", encoding="utf-8") as phase_log:

        def on_phase(record):
            line = json.dumps(record, sort_keys=True)
            phase_log.write(line + "\n")
            print(line, file=sys.stderr)

        final_dim, soms, reports = incremental_evaluate(data, som_cfg, on_phase=on_phase)

    full_config = {
        "corpus": vars(corpus_cfg),
        "som": som_cfg.to_dict(),
        "jl_epsilon": jl_epsilon,
        "pca_threshold": pca_threshold,
    }
    provenance = {
        "config": full_config,
        "config_hash": hashlib.sha256(canonical_json(full_config).encode()).hexdigest(),
        "seed": som_cfg.seed,
        "jl_bound": {"m": len(doc_ids), "epsilon": jl_epsilon, "min_dimension": jl_bound},
        "intrinsic_dim": {
            "value": estimate.intrinsic_dim,
            "threshold": estimate.threshold,
        },
        "unmappable_ids": result.unmappable_ids,
        # Wall-clock stamps break reproducible builds; only set when asked.
        "created_at": os.environ.get("DOCMAP_BUILD_TIMESTAMP"),
    }
    kmap = build_map(
        soms,
        reports,
        data,
        doc_ids,
        vocabulary_ref=result.vocabulary.content_hash(),
        provenance=provenance,
        annotations=result.labels,
    )
    save_map(kmap, args.out)
    result.save(_vocab_sidecar(args.out))
    if args.json_export:
        save_map_json(kmap, args.json_export)

    final = reports[-1]
    print(
        json.dumps(
            {
                "map": str(args.out),
                "dim": final_dim,
                "entries": len(doc_ids),
                "unmappable": len(result.unmappable_ids),
                "jl_bound": jl_bound,
                "intrinsic_dim": estimate.intrinsic_dim,
                "final_stability": final.to_dict(),
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_query(args) -> int:
    kmap = load_map(args.map)
    if args.query_cmd == "neighbors":
        if (args.id is None) == (args.coords is None):
            raise ValueError("provide exactly one of --id or --coords")
        query = args.id if args.id is not None else [float(x) for x in args.coords.split(",")]
        results = neighbors(kmap, query, args.k)
        print(
            json.dumps(
                [
                    {"doc_id": r.doc_id, "distance": r.distance, "rank": r.rank}
                    for r in results
                ]
            )
        )
    elif args.query_cmd == "relevance":
        print(json.dumps({"a": args.a, "b": args.b, "distance": relevance(kmap, args.a, args.b)}))
    elif args.query_cmd == "locate":
        vocab = _load_vocab(args)
        coords = locate_text(kmap, args.text, vocab)
        print(json.dumps({"coords": [float(x) for x in coords]}))
    elif args.query_cmd == "view":
        view = project_to_view(kmap, args.dim)
        print(
            json.dumps(
                {
                    "target_dim": view.target_dim,
                    "basis": [[float(x) for x in row] for row in view.basis],
                    "center": [float(x) for x in view.center],
                    "view_coords": {
                        k: [float(x) for x in v] for k, v in view.view_coords.items()
                    },
                }
            )
        )
    return 0


def cmd_dims(args) -> int:
    if args.dims_cmd == "jl":
        n = jl_min_dimension(JlQuery(m=args.m, epsilon=args.epsilon))
        print(json.dumps({"m": args.m, "epsilon": args.epsilon, "min_dimension": n}))
    else:
        data = json.loads(Path(args.input).read_text(encoding="utf-8"))
        if isinstance(data, dict) and "vectors" in data:
            size = len(data["vocabulary"]["terms"])
            rows = []
            for rec in data["vectors"]:
                row = np.zeros(size)
                row[rec["indices"]] = rec["weights"]
                rows.append(row)
            vectors = np.array(rows)
        else:
            vectors = np.array(data, dtype=np.float64)
        est = intrinsic_dimension_pca(vectors, args.threshold)
        print(
            json.dumps(
                {
                    "intrinsic_dim": est.intrinsic_dim,
                    "threshold": est.threshold,
                    "explained_variance": est.explained_variance,
                }
            )
        )
    return 0


def cmd_decode_sim(args) -> int:
    if args.decode_cmd == "run":
        kmap = load_map(args.map)
        cfg = {}
        if args.config:
            cfg = load_config_file(args.config).get("decode_sim", {})
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        proto = ProtocolConfig(
            k_neighbors=cfg.get("k_neighbors", 5),
            window=cfg.get("window", 3),
            learning_rate=tuple(cfg.get("learning_rate", (0.05, 0.01))),
            hidden=cfg.get("hidden", 64),
            keep_scale=cfg.get("keep_scale", True),
            seed=seed,
        )
        subject = make_cohort(
            1,
            cfg.get("voxels", 100),
            kmap.dim,
            cfg.get("mixing", 0.7),
            cfg.get("noise_sigma", 0.0),
            seed,
        )[0]
        decoder, log = run_protocol(kmap, subject, args.iterations, proto)

        lo, hi = kmap.bounding_box()
        rng = np.random.default_rng(derived_seed(seed, _EVAL_POINT_SALT))
        points = lo + rng.random((args.eval_samples, kmap.dim)) * (hi - lo)
        feats = np.array(
            [
                protocol_features(
                    synth_pattern(subject, p, derived_seed(seed, i, _EVAL_POINT_SALT)),
                    proto.window,
                    proto.keep_scale,
                )
                for i, p in enumerate(points)
            ]
        )
        err = rmse(decoder, feats, points)
        if args.log:
            Path(args.log).write_text(json.dumps(log, sort_keys=True), encoding="utf-8")
        print(
            json.dumps(
                {
                    "iterations": args.iterations,
                    "holdout_rmse": err,
                    "coordinate_range": kmap.coordinate_range(),
                    "relative_rmse": err / kmap.coordinate_range(),
                },
                sort_keys=True,
            )
        )
    else:
        cfg = ExperimentConfig()
        if args.config:
            data = load_config_file(args.config).get("decode_sim", {})
            cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **data})
        if args.seed is not None:
            cfg.seed = args.seed
        result = run_pretraining_experiment(cfg)
        write_experiment_outputs(result, args.curves, args.summary)
        print(format_summary_table(result))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    kmap = load_map(args.map)
    vocab = _load_vocab(args)
    app = create_app(kmap, vocab, ui_dir=args.ui_dir)

    bind = args.bind or os.environ.get("DOCMAP_BIND", "127.0.0.1:8000")
    host, _, port = bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docmap",
        description="Build and browse a Euclidean document map; simulate a pattern decoder.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("build", help="ingest a corpus and train the map")
    b.add_argument("corpus", help="directory of *.txt files or a JSON-lines file")
    b.add_argument("--config", help="JSON or TOML config file")
    b.add_argument("--out", required=True, help="output map file")
    b.add_argument("--seed", type=int)
    b.add_argument("--json-export", help="write a JSON debug dump of the map")
    b.add_argument("--min-df", type=int, dest="min_df")
    b.add_argument("--max-df-ratio", type=float, dest="max_df_ratio")
    b.add_argument("--max-terms", type=int, dest="max_terms")
    b.add_argument("--initial-dim", type=int, dest="initial_dim")
    b.add_argument("--nodes-per-axis", type=int, dest="nodes_per_axis")
    b.add_argument("--epochs-per-phase", type=int, dest="epochs_per_phase")
    b.add_argument("--parallel-runs", type=int, dest="parallel_runs")
    b.add_argument("--stability-threshold", type=float, dest="stability_threshold")
    b.add_argument("--max-dim", type=int, dest="max_dim")
    b.add_argument("--probe-size", type=int, dest="probe_size")
    b.add_argument("--learning-rate", type=_pair, dest="learning_rate", metavar="INITIAL,FINAL")
    b.add_argument(
        "--neighborhood-radius", type=_pair, dest="neighborhood_radius", metavar="INITIAL,FINAL"
    )
    b.add_argument("--jl-epsilon", type=float, dest="jl_epsilon")
    b.add_argument("--pca-threshold", type=float, dest="pca_threshold")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="query a built map")
    qsub = q.add_subparsers(dest="query_cmd", required=True)
    qn = qsub.add_parser("neighbors")
    qn.add_argument("--map", required=True)
    qn.add_argument("--id")
    qn.add_argument("--coords", help="comma-separated coordinates")
    qn.add_argument("--k", type=int, required=True)
    qr = qsub.add_parser("relevance")
    qr.add_argument("--map", required=True)
    qr.add_argument("--a", required=True)
    qr.add_argument("--b", required=True)
    ql = qsub.add_parser("locate")
    ql.add_argument("--map", required=True)
    ql.add_argument("--text", required=True)
    ql.add_argument("--vocab", help="corpus JSON (default: <map>.vocab.json)")
    qv = qsub.add_parser("view")
    qv.add_argument("--map", required=True)
    qv.add_argument("--dim", type=int, default=2, choices=(2, 3))
    for p in (qn, qr, ql, qv):
        p.set_defaults(func=cmd_query)

    d = sub.add_parser("dims", help="dimension calculations")
    dsub = d.add_subparsers(dest="dims_cmd", required=True)
    dj = dsub.add_parser("jl")
    dj.add_argument("--m", type=int, required=True)
    dj.add_argument("--epsilon", type=float, required=True)
    dp = dsub.add_parser("pca")
    dp.add_argument("--input", required=True, help="corpus JSON or a JSON array of vectors")
    dp.add_argument("--threshold", type=float, default=0.95)
    for p in (dj, dp):
        p.set_defaults(func=cmd_dims)

    ds = sub.add_parser("decode-sim", help="decoder simulation experiments")
    dssub = ds.add_subparsers(dest="decode_cmd", required=True)
    dr = dssub.add_parser("run")
    dr.add_argument("--map", required=True)
    dr.add_argument("--iterations", type=int, default=2000)
    dr.add_argument("--eval-samples", type=int, default=200, dest="eval_samples")
    dr.add_argument("--config")
    dr.add_argument("--seed", type=int)
    dr.add_argument("--log", help="write the protocol log JSON here")
    dpre = dssub.add_parser("pretrain")
    dpre.add_argument("--config")
    dpre.add_argument("--seed", type=int)
    dpre.add_argument("--curves", required=True, help="JSON-lines learning curves output")
    dpre.add_argument("--summary", required=True, help="summary JSON output")
    for p in (dr, dpre):
        p.set_defaults(func=cmd_decode_sim)

    s = sub.add_parser("serve", help="serve the HTTP API and UI for one map")
    s.add_argument("--map", required=True)
    s.add_argument("--vocab", help="corpus JSON (default: <map>.vocab.json)")
    s.add_argument("--bind", help="host:port (default env DOCMAP_BIND or 127.0.0.1:8000)")
    s.add_argument("--ui-dir", dest="ui_dir", help="static UI directory override")
    s.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DocmapError, ValueError, OSError) as exc:
        return _fail(args.cmd, exc)


if __name__ == "__main__":
    sys.exit(main())
