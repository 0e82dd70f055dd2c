"""End-to-end orchestration: graphs -> GCN -> fusion tagger -> decode -> eval.

Per document (default scope): build its co-occurrence graph, create the
edge-prediction dataset, train a dedicated GCN, and read node embeddings
per token. Corpus scope instead trains one GCN on the union graph of
the training documents and shares node embeddings across documents
(out-of-vocabulary tokens get zero vectors). Every run artifact records
the effective config and seed.
"""

from __future__ import annotations

import json
import multiprocessing
from pathlib import Path

import numpy as np

from . import gcn as gcn_mod
from . import linkpred
from .config import RunConfig
from .cooc import CoocGraph, build_graph, normalize_token_for_node
from .corpus import CorpusSplit, Document, derive_bio_labels, load_corpus
from .decode import decode_bio
from .embeddings import make_provider, write_kpe1
from .evaluation import ALL, evaluate_corpus
from .tagger import (
    CLASS_INDEX,
    DocFeatures,
    TaggerHyper,
    init_tagger,
    predict_document,
    save_tagger,
    train_tagger,
)


class PipelineError(RuntimeError):
    def __init__(self, stage: str, doc_id: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed on document {doc_id!r}: {cause}")
        self.stage = stage
        self.doc_id = doc_id


def ensure_labels(doc: Document) -> Document:
    if doc.labels is not None:
        return doc
    return derive_bio_labels(doc)


def train_doc_gcn(tokens, config: RunConfig):
    """Graph + trained node embeddings for one token sequence.

    Edgeless graphs (single-token documents) skip training and produce
    zero embeddings.
    """
    graph = build_graph(tokens, config.window)
    if graph.n_edges == 0:
        Z = np.zeros((graph.n_nodes, config.gcn_dim))
        return graph, Z, {"trained": False, "n_edges": 0}
    data = linkpred.make_edge_dataset(graph, config.neg_ratio, config.seed)
    model = gcn_mod.init_model(graph.n_nodes, config.gcn_dims, config.seed)
    model, log = linkpred.train_gcn(
        model, graph, data,
        epochs=config.gcn_epochs, lr=config.gcn_lr, seed=config.seed,
    )
    Z = gcn_mod.forward(model, graph).Z
    aucs = [e["holdout_auc"] for e in log if e["holdout_auc"] is not None]
    summary = {
        "trained": True,
        "n_nodes": graph.n_nodes,
        "n_edges": graph.n_edges,
        "n_pos": data.n_pos,
        "n_neg": data.n_neg,
        "achieved_ratio": data.achieved_ratio,
        "final_train_loss": log[-1]["train_loss"],
        "best_holdout_auc": max(aucs) if aucs else None,
    }
    return graph, Z, summary


def _doc_gcn_job(args):
    tokens, config = args
    return train_doc_gcn(tokens, config)


def merge_graphs(graphs) -> CoocGraph:
    """Union of graphs: shared vocabulary, summed edge weights."""
    index: dict[str, int] = {}
    weights: dict[tuple[int, int], int] = {}
    for g in graphs:
        remap = []
        for form in g.vocab:
            if form not in index:
                index[form] = len(index)
            remap.append(index[form])
        for u, v, w in zip(g.us, g.vs, g.weights):
            a, b = remap[int(u)], remap[int(v)]
            if a > b:
                a, b = b, a
            weights[(a, b)] = weights.get((a, b), 0) + int(w)
    vocab = tuple(index)
    pairs = sorted(weights)
    us = np.array([p[0] for p in pairs], dtype=np.int64)
    vs = np.array([p[1] for p in pairs], dtype=np.int64)
    ws = np.array([weights[p] for p in pairs], dtype=np.int64)
    return CoocGraph(vocab, us, vs, ws, index)


class GraphEmbedder:
    """Maps each document to per-token graph embeddings z_t."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.summaries: dict[str, dict] = {}
        self._corpus_graph: CoocGraph | None = None
        self._corpus_Z: np.ndarray | None = None

    def fit_corpus(self, documents) -> None:
        """Corpus scope: one GCN over the union graph of these documents."""
        docs = list(documents)
        graphs = [build_graph(d.tokens, self.config.window) for d in docs]
        union = merge_graphs(graphs)
        self._corpus_graph = union
        if union.n_edges == 0:
            self._corpus_Z = np.zeros((union.n_nodes, self.config.gcn_dim))
            self.summaries["_corpus"] = {"trained": False, "n_edges": 0}
            return
        data = linkpred.make_edge_dataset(union, self.config.neg_ratio, self.config.seed)
        model = gcn_mod.init_model(union.n_nodes, self.config.gcn_dims, self.config.seed)
        model, log = linkpred.train_gcn(
            model, union, data,
            epochs=self.config.gcn_epochs, lr=self.config.gcn_lr,
            seed=self.config.seed,
        )
        self._corpus_Z = gcn_mod.forward(model, union).Z
        self.summaries["_corpus"] = {
            "trained": True,
            "n_nodes": union.n_nodes,
            "n_edges": union.n_edges,
            "final_train_loss": log[-1]["train_loss"],
        }

    def embed_documents(self, documents) -> dict[str, np.ndarray]:
        """Per-token z sequences keyed by document id."""
        docs = list(documents)
        cfg = self.config
        out: dict[str, np.ndarray] = {}
        if cfg.no_graph:
            for doc in docs:
                out[doc.id] = np.zeros((len(doc.tokens), cfg.gcn_dim))
            return out
        if cfg.graph_scope == "corpus":
            if self._corpus_graph is None:
                raise RuntimeError("corpus scope requires fit_corpus() first")
            index = self._corpus_graph.index
            Z = self._corpus_Z
            for doc in docs:
                rows = np.zeros((len(doc.tokens), Z.shape[1]))
                for t, tok in enumerate(doc.tokens):
                    node = index.get(normalize_token_for_node(tok))
                    if node is not None:
                        rows[t] = Z[node]
                out[doc.id] = rows
            return out
        jobs = [(doc.tokens, cfg) for doc in docs]
        if cfg.jobs > 1 and len(docs) > 1:
            with multiprocessing.Pool(cfg.jobs) as pool:
                results = pool.map(_doc_gcn_job, jobs)
        else:
            results = [_doc_gcn_job(j) for j in jobs]
        for doc, (graph, Z, summary) in zip(docs, results):
            try:
                ids = [graph.index[normalize_token_for_node(t)] for t in doc.tokens]
            except KeyError as exc:  # cannot happen for same-document graphs
                raise PipelineError("graph-lookup", doc.id, exc)
            out[doc.id] = Z[ids]
            self.summaries[doc.id] = summary
        return out


def build_bundles(documents, z_by_doc, provider, with_labels: bool):
    bundles = []
    for doc in documents:
        emb = provider.embed(doc)
        y = None
        if with_labels:
            if doc.labels is None:
                raise ValueError(f"document {doc.id!r} has no labels")
            y = np.array([CLASS_INDEX[lab] for lab in doc.labels], dtype=np.int64)
        bundles.append(DocFeatures(doc.id, z_by_doc[doc.id], emb.H, y))
    return bundles


def split_train_val(docs: list[Document], seed: int):
    if len(docs) < 2:
        return docs, []
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(docs))
    n_val = max(1, len(docs) // 10)
    val_ids = set(order[:n_val])
    train = [d for i, d in enumerate(docs) if i not in val_ids]
    val = [d for i, d in enumerate(docs) if i in val_ids]
    return train, val


def _meta_line(config: RunConfig) -> str:
    return json.dumps(
        {"_meta": {"config": config.to_dict(), "seed": config.seed}},
        sort_keys=True,
    )


def write_predictions(path, config: RunConfig, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_meta_line(config) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_predictions(path) -> dict[str, list[str]]:
    """Prediction JSONL -> ordered phrase lists; _meta rows are skipped."""
    out: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "_meta" in obj:
                continue
            out[obj["id"]] = [kp["text"] for kp in obj["keyphrases"]]
    return out


def export_embeddings(split: CorpusSplit, provider, out_path) -> None:
    docs = [(doc.id, provider.embed(doc).H) for doc in split]
    write_kpe1(out_path, provider.d_c, docs)


def run_pipeline(config: RunConfig) -> dict:
    """Train on the train split, predict and evaluate on the test split."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not config.train_path:
        raise ValueError("config.train_path is required")

    train_docs = [ensure_labels(d) for d in load_corpus(config.train_path, name="train")]
    if config.val_path:
        val_docs = [ensure_labels(d) for d in load_corpus(config.val_path, name="validation")]
    else:
        train_docs, val_docs = split_train_val(train_docs, config.seed)
    test_docs = (
        list(load_corpus(config.test_path, name="test")) if config.test_path else []
    )

    provider = make_provider(config.embeddings, config.emb_dim)
    embedder = GraphEmbedder(config)
    if config.graph_scope == "corpus" and not config.no_graph:
        embedder.fit_corpus(train_docs + val_docs)

    z_train = embedder.embed_documents(train_docs)
    z_val = embedder.embed_documents(val_docs)
    train_bundles = build_bundles(train_docs, z_train, provider, with_labels=True)
    val_bundles = build_bundles(val_docs, z_val, provider, with_labels=True)

    hyper = TaggerHyper(
        batch=config.batch,
        epochs=config.tagger_epochs,
        lr=config.lr,
        patience=config.patience,
        anneal=config.anneal,
    )
    model = init_tagger(config.gcn_dim, provider.d_c, config.proj_dim, config.seed)
    model, tagger_log = train_tagger(
        model, train_bundles, val_bundles, hyper,
        seed=config.seed, no_graph=config.no_graph,
    )
    ckpt_path = out_dir / "tagger.ckpt"
    save_tagger(model, ckpt_path)
    with open(str(ckpt_path) + ".json", "w", encoding="utf-8") as fh:
        json.dump({"config": config.to_dict(), "seed": config.seed}, fh, sort_keys=True, indent=2)

    result: dict = {"out_dir": str(out_dir), "tagger_checkpoint": str(ckpt_path)}
    report_obj = None
    if test_docs:
        z_test = embedder.embed_documents(test_docs)
        records = []
        predicted: dict[str, list[str]] = {}
        for doc in test_docs:
            emb = provider.embed(doc)
            pred = predict_document(
                model, z_test[doc.id], emb.H, config.chunk_limit
            )
            phrases = decode_bio(doc.tokens, pred)
            records.append(phrases.to_record(doc.id))
            predicted[doc.id] = phrases.texts()
        pred_path = out_dir / "predictions.jsonl"
        write_predictions(pred_path, config, records)
        result["predictions"] = str(pred_path)

        gold = {
            d.id: set(d.gold_keyphrases)
            for d in test_docs
            if d.gold_keyphrases is not None
        }
        if gold:
            report = evaluate_corpus(gold, predicted, k=ALL)
            report_obj = {
                "config": config.to_dict(),
                "seed": config.seed,
                "ablation_no_graph": config.no_graph,
                "metrics": report.to_dict(),
            }
            report_path = out_dir / "report.json"
            with open(report_path, "w", encoding="utf-8") as fh:
                json.dump(report_obj, fh, sort_keys=True, indent=2)
            result["report"] = str(report_path)
            result["mean_f1"] = report.mean_f1

    logs_path = out_dir / "logs.json"
    with open(logs_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "config": config.to_dict(),
                "gcn": embedder.summaries,
                "tagger": tagger_log,
            },
            fh,
            sort_keys=True,
            indent=2,
        )
    result["logs"] = str(logs_path)
    if report_obj is not None:
        result["metrics"] = report_obj["metrics"]
    return result
