"""Weighted undirected co-occurrence graphs over token sequences.

Nodes are lowercased token types; an edge {u, v} is weighted by the
number of sliding windows in which both types occur (counted once per
window). Windows slide one token at a time and truncate at the end of
the sequence.

The pair-counting inner loop runs in a compiled Cython kernel when the
extension built; otherwise a pure-Python fallback with identical
semantics is selected at import time (see ``BACKEND``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

try:
    from . import _cooc_cy as _kernel

    BACKEND = "cython"
except ImportError:  # extension not built
    from . import _cooc_py as _kernel

    BACKEND = "python"


def normalize_token_for_node(token: str) -> str:
    """Node key for a surface token: case-folded, punctuation untouched."""
    return token.lower()


@dataclass
class CoocGraph:
    vocab: tuple[str, ...]
    us: np.ndarray  # edge endpoints, us[i] < vs[i]
    vs: np.ndarray
    weights: np.ndarray
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {form: i for i, form in enumerate(self.vocab)}

    @property
    def n_nodes(self) -> int:
        return len(self.vocab)

    @property
    def n_edges(self) -> int:
        return len(self.us)

    def edge_weights(self) -> dict[tuple[int, int], int]:
        return {
            (int(u), int(v)): int(w)
            for u, v, w in zip(self.us, self.vs, self.weights)
        }

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency, zero diagonal, float64."""
        n = self.n_nodes
        data = np.concatenate([self.weights, self.weights]).astype(np.float64)
        rows = np.concatenate([self.us, self.vs])
        cols = np.concatenate([self.vs, self.us])
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def degrees(self) -> np.ndarray:
        """Neighbor counts per node (edge multiplicity ignored)."""
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        np.add.at(deg, self.us, 1)
        np.add.at(deg, self.vs, 1)
        return deg

    def to_json_dict(self) -> dict:
        return {
            "vocab": list(self.vocab),
            "edges": [
                [int(u), int(v), int(w)]
                for u, v, w in zip(self.us, self.vs, self.weights)
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CoocGraph":
        edges = obj["edges"]
        us = np.array([e[0] for e in edges], dtype=np.int64)
        vs = np.array([e[1] for e in edges], dtype=np.int64)
        ws = np.array([e[2] for e in edges], dtype=np.int64)
        return cls(tuple(obj["vocab"]), us, vs, ws)


def build_graph(tokens, window: int) -> CoocGraph:
    """Build the co-occurrence graph of a token sequence.

    Vertices are unique lowercased token types; edge weight counts the
    windows of size ``window`` in which the two types co-occur.
    """
    tokens = list(tokens)
    if not tokens:
        raise ValueError("cannot build a graph from an empty token sequence")
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    index: dict[str, int] = {}
    ids = np.empty(len(tokens), dtype=np.int32)
    for i, tok in enumerate(tokens):
        form = normalize_token_for_node(tok)
        if form not in index:
            index[form] = len(index)
        ids[i] = index[form]
    vocab = tuple(index)
    us, vs, ws = _kernel.count_window_pairs(ids, window, len(vocab))
    return CoocGraph(vocab, us, vs, ws, index)
