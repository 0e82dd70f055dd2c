"""Self-supervised edge prediction: the GCN's training signal.

Every graph edge is a positive sample; negatives are non-edges drawn
uniformly without replacement at a fixed ratio. Pairs are scored by the
dot product of their node embeddings, trained with mean binary
cross-entropy (logits clamped to [-30, 30]), and models are selected by
held-out AUC-ROC.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gcn as gcn_mod
from .cooc import CoocGraph
from .gcn import GcnModel, NodeEmbeddings

LOGIT_CLAMP = 30.0


@dataclass(frozen=True)
class EdgeSample:
    n1: int
    n2: int
    label: bool

    def __post_init__(self):
        if self.n1 == self.n2:
            raise ValueError(f"self-pair ({self.n1}, {self.n1}) is not a valid sample")


@dataclass
class EdgeDataset:
    samples: list[EdgeSample]
    requested_ratio: int
    achieved_ratio: float

    @property
    def n_g(self) -> int:
        return len(self.samples)

    @property
    def n_pos(self) -> int:
        return sum(1 for s in self.samples if s.label)

    @property
    def n_neg(self) -> int:
        return self.n_g - self.n_pos

    def arrays(self):
        i1 = np.array([s.n1 for s in self.samples], dtype=np.int64)
        i2 = np.array([s.n2 for s in self.samples], dtype=np.int64)
        y = np.array([1.0 if s.label else 0.0 for s in self.samples])
        return i1, i2, y


def make_edge_dataset(graph: CoocGraph, ratio: int, seed: int) -> EdgeDataset:
    """All edges as positives plus ratio-many sampled non-edges each.

    When the graph has fewer non-edges than requested, every non-edge is
    used and the achieved ratio is recorded (no error).
    """
    if ratio < 1:
        raise ValueError(f"negative sampling ratio must be >= 1, got {ratio}")
    if graph.n_edges < 1:
        raise ValueError("graph has no edges to predict")
    n = graph.n_nodes
    edge_keys = {(int(u), int(v)) for u, v in zip(graph.us, graph.vs)}
    samples = [EdgeSample(u, v, True) for u, v in sorted(edge_keys)]
    n_pos = len(samples)
    needed = ratio * n_pos
    total_non = n * (n - 1) // 2 - n_pos
    rng = np.random.default_rng(seed)

    negatives: list[tuple[int, int]]
    if total_non <= 0:
        negatives = []
    elif needed >= total_non or needed * 2 > total_non:
        all_non = [
            (u, v)
            for u in range(n)
            for v in range(u + 1, n)
            if (u, v) not in edge_keys
        ]
        if needed >= total_non:
            negatives = all_non
        else:
            picked = rng.choice(total_non, size=needed, replace=False)
            negatives = [all_non[i] for i in picked]
    else:
        chosen: set[tuple[int, int]] = set()
        negatives = []
        while len(negatives) < needed:
            draw = rng.integers(0, n, size=(max(1024, 2 * needed), 2))
            for a, b in draw:
                if a == b:
                    continue
                key = (int(a), int(b)) if a < b else (int(b), int(a))
                if key in edge_keys or key in chosen:
                    continue
                chosen.add(key)
                negatives.append(key)
                if len(negatives) == needed:
                    break
    samples.extend(EdgeSample(u, v, False) for u, v in negatives)
    achieved = len(negatives) / n_pos
    return EdgeDataset(samples, ratio, achieved)


def edge_logit(embeddings: NodeEmbeddings, i: int, j: int) -> float:
    """Pre-sigmoid connection score z_i . z_j."""
    Z = embeddings.Z
    n = Z.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node pair ({i}, {j}) out of range for {n} nodes")
    return float(Z[i] @ Z[j])


def edge_probability_matrix(embeddings: NodeEmbeddings) -> np.ndarray:
    """All pairwise logits Z @ Z^T (apply sigmoid for probabilities)."""
    return embeddings.Z @ embeddings.Z.T


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _bce_from_logits(logits: np.ndarray, y: np.ndarray) -> float:
    clamped = np.clip(logits, -LOGIT_CLAMP, LOGIT_CLAMP)
    return float(np.mean(np.logaddexp(0.0, clamped) - y * clamped))


def bce_loss(embeddings: NodeEmbeddings, data: EdgeDataset) -> float:
    """Mean binary cross-entropy of the dataset under current embeddings."""
    if data.n_g == 0:
        raise ValueError("edge dataset is empty")
    i1, i2, y = data.arrays()
    logits = np.einsum("ij,ij->i", embeddings.Z[i1], embeddings.Z[i2])
    return _bce_from_logits(logits, y)


def _bce_loss_and_grad_z(Z: np.ndarray, i1, i2, y):
    logits = np.einsum("ij,ij->i", Z[i1], Z[i2])
    clamped = np.clip(logits, -LOGIT_CLAMP, LOGIT_CLAMP)
    loss = float(np.mean(np.logaddexp(0.0, clamped) - y * clamped))
    dlogit = (_sigmoid(clamped) - y) / len(y)
    dlogit = dlogit * (np.abs(logits) < LOGIT_CLAMP)  # clamp passthrough
    dZ = np.zeros_like(Z)
    np.add.at(dZ, i1, dlogit[:, None] * Z[i2])
    np.add.at(dZ, i2, dlogit[:, None] * Z[i1])
    return loss, dZ


def auc_roc(scored) -> float:
    """Mann-Whitney AUC: P(random positive outscores random negative),
    ties counting one half."""
    scores = np.array([s for s, _ in scored], dtype=np.float64)
    labels = np.array([bool(l) for _, l in scored])
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC-ROC needs at least one positive and one negative")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    ranks[order] = np.arange(1, len(scores) + 1)
    # average ranks within tie groups
    sorted_scores = scores[order]
    _, inverse, counts = np.unique(sorted_scores, return_inverse=True, return_counts=True)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    mean_ranks = starts + (counts + 1) / 2.0
    ranks[order] = mean_ranks[inverse]
    rank_sum = ranks[labels].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _split_holdout(data: EdgeDataset, frac: float, seed: int):
    rng = np.random.default_rng(seed)
    pos_idx = [i for i, s in enumerate(data.samples) if s.label]
    neg_idx = [i for i, s in enumerate(data.samples) if not s.label]
    hold: list[int] = []
    train: list[int] = []
    for idx in (pos_idx, neg_idx):
        if len(idx) >= 2:
            n_hold = min(len(idx) - 1, max(1, int(frac * len(idx))))
        else:
            n_hold = 0
        perm = rng.permutation(len(idx))
        hold.extend(idx[i] for i in perm[:n_hold])
        train.extend(idx[i] for i in perm[n_hold:])
    return sorted(train), sorted(hold)


def train_gcn(
    model: GcnModel,
    graph: CoocGraph,
    data: EdgeDataset,
    epochs: int = 5,
    lr: float = 0.05,
    seed: int = 0,
    holdout_frac: float = 0.1,
):
    """Full-batch gradient descent on the edge-prediction BCE.

    One parameter update per epoch over the 90% training portion; after
    each update the log records training loss plus held-out loss and
    AUC. The returned model carries the best-AUC epoch's parameters
    (falling back to held-out loss, then training loss, when AUC is
    undefined for the holdout).
    """
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    i1, i2, y = data.arrays()
    train_idx, hold_idx = _split_holdout(data, holdout_frac, seed)
    t1, t2, ty = i1[train_idx], i2[train_idx], y[train_idx]
    h1, h2, hy = i1[hold_idx], i2[hold_idx], y[hold_idx]
    hold_has_auc = len(hold_idx) > 0 and 0 < hy.sum() < len(hy)

    log: list[dict] = []
    best_key: tuple | None = None
    best_params: GcnModel | None = None
    for epoch in range(1, epochs + 1):
        emb, tape = gcn_mod.forward_with_tape(model, graph)
        loss, dZ = _bce_loss_and_grad_z(emb.Z, t1, t2, ty)
        if not np.isfinite(loss):
            raise RuntimeError(f"non-finite training loss at epoch {epoch}: {loss}")
        grads = gcn_mod.backward(model, tape, dZ)
        model.embed_table -= lr * grads.embed_table
        for W, dW in zip(model.weights, grads.weights):
            W -= lr * dW

        Z = gcn_mod.forward(model, graph).Z
        train_loss, _ = _bce_loss_and_grad_z(Z, t1, t2, ty)
        entry = {"epoch": epoch, "train_loss": train_loss, "lr": lr}
        hold_loss = None
        hold_auc = None
        if len(hold_idx) > 0:
            logits = np.einsum("ij,ij->i", Z[h1], Z[h2])
            hold_loss = _bce_from_logits(logits, hy)
            if hold_has_auc:
                hold_auc = auc_roc(list(zip(logits, hy > 0.5)))
        entry["holdout_loss"] = hold_loss
        entry["holdout_auc"] = hold_auc
        log.append(entry)

        if hold_auc is not None:
            key = (0, -hold_auc)
        elif hold_loss is not None:
            key = (1, hold_loss)
        else:
            key = (2, train_loss)
        if best_key is None or key < best_key:
            best_key = key
            best_params = model.copy()

    if best_params is not None:
        model.embed_table[...] = best_params.embed_table
        for W, bW in zip(model.weights, best_params.weights):
            W[...] = bW
    return model, log
