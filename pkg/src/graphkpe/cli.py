"""Command-line interface.

Subcommands: build-graph, train-gcn, embed, train-tagger, predict,
evaluate, run. Exit code 0 on success, nonzero with a diagnostic on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


from . import gcn as gcn_mod
from . import linkpred
from .config import RunConfig, build_config
from .cooc import build_graph
from .corpus import load_corpus
from .decode import decode_bio
from .embeddings import make_provider
from .evaluation import ALL, evaluate_corpus
from .pipeline import (
    GraphEmbedder,
    build_bundles,
    ensure_labels,
    export_embeddings,
    merge_graphs,
    read_predictions,
    run_pipeline,
    write_predictions,
    split_train_val,
)
from .tagger import (
    TaggerHyper,
    init_tagger,
    load_tagger,
    predict_document,
    save_tagger,
    train_tagger,
)


def _add_graph_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--neg-ratio", type=int, default=5)
    p.add_argument("--dim", type=int, default=192, help="GCN embedding dimension")
    p.add_argument("--depth", type=int, default=2, help="number of GCN layers")
    p.add_argument("--gcn-epochs", type=int, default=5)
    p.add_argument("--gcn-lr", type=float, default=0.05)


def _config_from_args(args, **extra) -> RunConfig:
    values = dict(
        window=args.window,
        neg_ratio=args.neg_ratio,
        gcn_dim=args.dim,
        gcn_depth=args.depth,
        gcn_epochs=args.gcn_epochs,
        gcn_lr=args.gcn_lr,
        seed=args.seed,
    )
    values.update(extra)
    return RunConfig(**values).validate()


def cmd_build_graph(args) -> int:
    split = load_corpus(args.corpus, format=args.format)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"_meta": {"window": args.window}}, sort_keys=True) + "\n")
        for doc in split:
            graph = build_graph(doc.tokens, args.window)
            rec = {"id": doc.id}
            rec.update(graph.to_json_dict())
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return 0


def cmd_train_gcn(args) -> int:
    split = load_corpus(args.corpus, format=args.format)
    config = _config_from_args(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dims = config.gcn_dims

    def train_one(graph):
        data = linkpred.make_edge_dataset(graph, config.neg_ratio, config.seed)
        model = gcn_mod.init_model(graph.n_nodes, dims, config.seed)
        return linkpred.train_gcn(
            model, graph, data,
            epochs=config.gcn_epochs, lr=config.gcn_lr, seed=config.seed,
        )

    logs = {}
    if args.graph_scope == "corpus":
        union = merge_graphs(build_graph(d.tokens, config.window) for d in split)
        model, log = train_one(union)
        gcn_mod.save_gcn(model, out_dir / "gcn.ckpt")
        with open(out_dir / "graph.json", "w", encoding="utf-8") as fh:
            json.dump(union.to_json_dict(), fh, sort_keys=True)
        logs["_corpus"] = log
    else:
        for doc in split:
            graph = build_graph(doc.tokens, config.window)
            if graph.n_edges == 0:
                logs[doc.id] = []
                continue
            model, log = train_one(graph)
            gcn_mod.save_gcn(model, out_dir / f"gcn-{doc.id}.ckpt")
            logs[doc.id] = log
    with open(out_dir / "train_gcn_log.json", "w", encoding="utf-8") as fh:
        json.dump({"config": config.to_dict(), "logs": logs}, fh, sort_keys=True, indent=2)
    return 0


def cmd_embed(args) -> int:
    split = load_corpus(args.corpus, format=args.format)
    provider = make_provider(args.embeddings, hashed_dim=args.dim)
    export_embeddings(split, provider, args.out)
    return 0


def _tagger_inputs(config: RunConfig, train_path, val_path):
    train_docs = [ensure_labels(d) for d in load_corpus(train_path, name="train")]
    if val_path:
        val_docs = [ensure_labels(d) for d in load_corpus(val_path, name="validation")]
    else:
        train_docs, val_docs = split_train_val(train_docs, config.seed)
    provider = make_provider(config.embeddings, config.emb_dim)
    embedder = GraphEmbedder(config)
    if config.graph_scope == "corpus" and not config.no_graph:
        embedder.fit_corpus(train_docs + val_docs)
    z_train = embedder.embed_documents(train_docs)
    z_val = embedder.embed_documents(val_docs)
    train_b = build_bundles(train_docs, z_train, provider, with_labels=True)
    val_b = build_bundles(val_docs, z_val, provider, with_labels=True)
    return provider, train_b, val_b


def cmd_train_tagger(args) -> int:
    config = _config_from_args(
        args,
        batch=args.batch,
        tagger_epochs=args.epochs,
        patience=args.patience,
        anneal=args.anneal,
        lr=args.lr,
        proj_dim=args.proj_dim,
        embeddings=args.embeddings,
        emb_dim=args.emb_dim,
        no_graph=args.no_graph,
    )
    provider, train_b, val_b = _tagger_inputs(config, args.corpus, args.val)
    hyper = TaggerHyper(
        batch=config.batch, epochs=config.tagger_epochs, lr=config.lr,
        patience=config.patience, anneal=config.anneal,
    )
    model = init_tagger(config.gcn_dim, provider.d_c, config.proj_dim, config.seed)
    model, log = train_tagger(
        model, train_b, val_b, hyper, seed=config.seed, no_graph=config.no_graph
    )
    save_tagger(model, args.out)
    with open(args.out + ".json", "w", encoding="utf-8") as fh:
        json.dump({"config": config.to_dict(), "log": log}, fh, sort_keys=True, indent=2)
    return 0


def cmd_predict(args) -> int:
    config = _config_from_args(
        args,
        embeddings=args.embeddings,
        emb_dim=args.emb_dim,
        no_graph=args.no_graph,
        chunk_limit=args.limit,
    )
    model = load_tagger(args.model)
    split = load_corpus(args.corpus, format=args.format)
    provider = make_provider(config.embeddings, config.emb_dim)
    embedder = GraphEmbedder(config)
    z_by_doc = embedder.embed_documents(split)
    records = []
    tag_records = []
    for doc in split:
        emb = provider.embed(doc)
        pred = predict_document(model, z_by_doc[doc.id], emb.H, config.chunk_limit)
        records.append(decode_bio(doc.tokens, pred).to_record(doc.id))
        if args.tags_out:
            tag_records.append(
                {
                    "id": doc.id,
                    "tokens": list(doc.tokens),
                    "labels": list(pred.labels),
                    "probs": [[float(x) for x in row] for row in pred.probs],
                }
            )
    write_predictions(args.out, config, records)
    if args.tags_out:
        with open(args.tags_out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"_meta": {"config": config.to_dict()}}, sort_keys=True) + "\n")
            for rec in tag_records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return 0


def cmd_evaluate(args) -> int:
    split = load_corpus(args.gold, format=args.format, name="test")
    gold = {
        d.id: set(d.gold_keyphrases) for d in split if d.gold_keyphrases is not None
    }
    predicted = read_predictions(args.pred)
    k = ALL if args.k == "all" else int(args.k)
    report = evaluate_corpus(gold, predicted, k=k)
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    return 0


def cmd_run(args) -> int:
    overrides = {
        key: getattr(args, key)
        for key in (
            "window", "neg_ratio", "gcn_dim", "gcn_depth", "gcn_epochs",
            "gcn_lr", "batch", "tagger_epochs", "patience", "anneal", "lr",
            "proj_dim", "chunk_limit", "emb_dim", "seed", "graph_scope",
            "embeddings", "train_path", "val_path", "test_path", "out_dir",
            "jobs",
        )
        if getattr(args, key) is not None
    }
    if args.no_graph:
        overrides["no_graph"] = True
    config = build_config(args.config, **overrides)
    result = run_pipeline(config)
    print(json.dumps({k: v for k, v in result.items() if k != "metrics"}, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphkpe")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="dump per-document co-occurrence graphs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", default="jsonl")
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("train-gcn", help="train edge-prediction GCNs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", default="jsonl")
    _add_graph_opts(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--graph-scope", choices=("document", "corpus"), default="document")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train_gcn)

    p = sub.add_parser("embed", help="materialize contextual embeddings to KPE1")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", default="jsonl")
    p.add_argument("--embeddings", default="hashed:0")
    p.add_argument("--dim", type=int, default=192)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train-tagger", help="train the BIO fusion tagger")
    p.add_argument("--corpus", required=True)
    p.add_argument("--val")
    _add_graph_opts(p)
    p.add_argument("--embeddings", default="hashed:0")
    p.add_argument("--emb-dim", type=int, default=192)
    p.add_argument("--proj-dim", type=int, default=192)
    p.add_argument("--batch", type=int, default=10)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--anneal", type=float, default=0.5)
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--no-graph", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_tagger)

    p = sub.add_parser("predict", help="tag a corpus and decode keyphrases")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", default="jsonl")
    p.add_argument("--model", required=True)
    _add_graph_opts(p)
    p.add_argument("--embeddings", default="hashed:0")
    p.add_argument("--emb-dim", type=int, default=192)
    p.add_argument("--limit", type=int, default=512)
    p.add_argument("--no-graph", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--tags-out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions with F1@k")
    p.add_argument("--gold", required=True)
    p.add_argument("--format", default="jsonl")
    p.add_argument("--pred", required=True)
    p.add_argument("--k", default="all")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline: train, predict, evaluate")
    p.add_argument("--config")
    p.add_argument("--train-path")
    p.add_argument("--val-path")
    p.add_argument("--test-path")
    p.add_argument("--out-dir")
    p.add_argument("--window", type=int)
    p.add_argument("--neg-ratio", type=int, dest="neg_ratio")
    p.add_argument("--gcn-dim", type=int, dest="gcn_dim")
    p.add_argument("--gcn-depth", type=int, dest="gcn_depth")
    p.add_argument("--gcn-epochs", type=int, dest="gcn_epochs")
    p.add_argument("--gcn-lr", type=float, dest="gcn_lr")
    p.add_argument("--batch", type=int)
    p.add_argument("--tagger-epochs", type=int, dest="tagger_epochs")
    p.add_argument("--patience", type=int)
    p.add_argument("--anneal", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--proj-dim", type=int, dest="proj_dim")
    p.add_argument("--chunk-limit", type=int, dest="chunk_limit")
    p.add_argument("--emb-dim", type=int, dest="emb_dim")
    p.add_argument("--seed", type=int)
    p.add_argument("--graph-scope", choices=("document", "corpus"), dest="graph_scope")
    p.add_argument("--no-graph", action="store_true")
    p.add_argument("--embeddings")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface stage diagnostics, nonzero exit
        print(f"graphkpe: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
