"""Graph convolutional encoder producing per-node embeddings.

Forward pass, per layer k = 1..K over a weighted co-occurrence graph:

    message_v = mean over neighbors u of ew(u,v) * h_{k-1}(u)   (zero if none)
    h_k(v)    = sigma(W_k @ concat(h_{k-1}(v), message_v))
    h_k(v)    = h_k(v) / sqrt(k * ||h_k(v)||^2)                 (skip if zero)

so final rows have Euclidean norm 1/sqrt(K) unless identically zero.
All arithmetic is float64; checkpoints store float32. A manual tape
supports exact backpropagation to the initial feature table and every
layer weight matrix (no autodiff dependency).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .cooc import CoocGraph


@dataclass
class GcnModel:
    embed_table: np.ndarray  # (V, d_in), trainable initial node features
    weights: list[np.ndarray]  # W_k with shape (d_k, 2 * d_{k-1})
    nonlinearity: str = "relu"  # "identity" is for tests/fixtures
    aggregator: str = "mean"

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def dims(self) -> list[int]:
        return [self.embed_table.shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def vocab_size(self) -> int:
        return self.embed_table.shape[0]

    def copy(self) -> "GcnModel":
        return GcnModel(
            self.embed_table.copy(),
            [w.copy() for w in self.weights],
            self.nonlinearity,
            self.aggregator,
        )


@dataclass
class NodeEmbeddings:
    Z: np.ndarray  # (V, d_g), row v is the embedding of node v


@dataclass
class GcnTape:
    """Intermediates of one forward pass, enough to backpropagate."""

    H: list[np.ndarray] = field(default_factory=list)  # H[0..K]
    messages: list[np.ndarray] = field(default_factory=list)
    concat_in: list[np.ndarray] = field(default_factory=list)
    pre_act: list[np.ndarray] = field(default_factory=list)
    post_act: list[np.ndarray] = field(default_factory=list)
    norm_den: list[np.ndarray] = field(default_factory=list)
    sq_norms: list[np.ndarray] = field(default_factory=list)
    adjacency: Any = None  # scipy CSR of the graph
    deg_inv: np.ndarray | None = None


@dataclass
class GcnGrads:
    embed_table: np.ndarray
    weights: list[np.ndarray]


def _glorot_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    a = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-a, a, size=(rows, cols))


def init_model(vocab_size: int, dims, seed: int) -> GcnModel:
    """Uniform Glorot init of the feature table and all layer weights."""
    dims = list(dims)
    if not dims:
        raise ValueError("dims must be nonempty")
    if len(dims) < 2:
        raise ValueError("need at least one layer: dims = [d_in, d_1, ...]")
    if vocab_size <= 0:
        raise ValueError(f"vocab_size must be positive, got {vocab_size}")
    rng = np.random.default_rng(seed)
    embed = _glorot_uniform(rng, vocab_size, dims[0])
    weights = [
        _glorot_uniform(rng, dims[k], 2 * dims[k - 1]) for k in range(1, len(dims))
    ]
    return GcnModel(embed, weights)


def _activate(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "identity":
        return x
    raise ValueError(f"unknown nonlinearity {kind!r}")


def _run_forward(model: GcnModel, graph: CoocGraph, keep_tape: bool):
    if graph.n_nodes != model.vocab_size:
        raise ValueError(
            f"graph has {graph.n_nodes} nodes but model expects {model.vocab_size}"
        )
    adj = graph.adjacency()
    deg = graph.degrees().astype(np.float64)
    deg_inv = np.where(deg > 0, 1.0 / np.maximum(deg, 1.0), 0.0)

    tape = GcnTape() if keep_tape else None
    if tape is not None:
        tape.adjacency = adj
        tape.deg_inv = deg_inv

    H = model.embed_table.astype(np.float64, copy=True)
    if tape is not None:
        tape.H.append(H)
    for k, W in enumerate(model.weights, start=1):
        message = deg_inv[:, None] * (adj @ H)
        concat_in = np.hstack([H, message])
        pre = concat_in @ W.T
        post = _activate(pre, model.nonlinearity)
        sq = np.einsum("ij,ij->i", post, post)
        den = np.sqrt(k * sq)
        safe = np.where(den > 0, den, 1.0)
        H = post / safe[:, None]
        if tape is not None:
            tape.messages.append(message)
            tape.concat_in.append(concat_in)
            tape.pre_act.append(pre)
            tape.post_act.append(post)
            tape.norm_den.append(den)
            tape.sq_norms.append(sq)
            tape.H.append(H)
    return NodeEmbeddings(H), tape


def forward(model: GcnModel, graph: CoocGraph) -> NodeEmbeddings:
    emb, _ = _run_forward(model, graph, keep_tape=False)
    return emb


def forward_with_tape(model: GcnModel, graph: CoocGraph):
    return _run_forward(model, graph, keep_tape=True)


def backward(model: GcnModel, tape: GcnTape, grad_z: np.ndarray) -> GcnGrads:
    """Backpropagate a gradient on Z to the feature table and weights."""
    adj = tape.adjacency
    deg_inv = tape.deg_inv
    g = np.asarray(grad_z, dtype=np.float64)
    d_weights: list[np.ndarray] = [None] * model.depth
    for k in range(model.depth, 0, -1):
        idx = k - 1
        S = tape.post_act[idx]
        den = tape.norm_den[idx]
        sq = tape.sq_norms[idx]
        nonzero = den > 0
        # H_k = S / den with den = sqrt(k)*||S||; zero rows pass through
        dS = np.where(
            nonzero[:, None],
            g / np.where(nonzero, den, 1.0)[:, None]
            - S
            * (
                np.einsum("ij,ij->i", g, S)
                / np.where(nonzero, den * sq, 1.0)
            )[:, None],
            g,
        )
        if model.nonlinearity == "relu":
            dP = dS * (tape.pre_act[idx] > 0)
        else:
            dP = dS
        W = model.weights[idx]
        d_weights[idx] = dP.T @ tape.concat_in[idx]
        dC = dP @ W
        d_half = tape.H[idx].shape[1]
        d_direct = dC[:, :d_half]
        d_msg = dC[:, d_half:]
        # message = deg_inv * (adj @ H_prev); adj is symmetric
        g = d_direct + adj @ (deg_inv[:, None] * d_msg)
    return GcnGrads(g, d_weights)


GCN_MAGIC = b"GCN1"


def save_gcn(model: GcnModel, path) -> None:
    """Binary checkpoint: magic, vocab size, dims, then f32 matrices."""
    dims = model.dims
    with open(path, "wb") as fh:
        fh.write(GCN_MAGIC)
        fh.write(struct.pack("<II", model.vocab_size, len(dims)))
        fh.write(struct.pack(f"<{len(dims)}I", *dims))
        fh.write(np.ascontiguousarray(model.embed_table, dtype="<f4").tobytes())
        for w in model.weights:
            fh.write(np.ascontiguousarray(w, dtype="<f4").tobytes())


def load_gcn(path) -> GcnModel:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != GCN_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        vocab_size, n_dims = struct.unpack("<II", fh.read(8))
        dims = list(struct.unpack(f"<{n_dims}I", fh.read(4 * n_dims)))

        def read_matrix(rows, cols):
            raw = fh.read(4 * rows * cols)
            if len(raw) != 4 * rows * cols:
                raise ValueError(f"{path}: truncated checkpoint")
            return (
                np.frombuffer(raw, dtype="<f4")
                .reshape(rows, cols)
                .astype(np.float64)
            )

        embed = read_matrix(vocab_size, dims[0])
        weights = [read_matrix(dims[k], 2 * dims[k - 1]) for k in range(1, n_dims)]
    return GcnModel(embed, weights)
