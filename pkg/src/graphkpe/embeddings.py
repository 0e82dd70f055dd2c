"""Per-token contextual embedding providers and the KPE1 file format.

Two providers: ``file`` reads a KPE1 binary produced by the offline
exporter (sub-word pooling already applied); ``hashed`` generates a
deterministic pseudorandom unit vector per lowercased token, making the
toolkit self-contained. The hashed provider is non-contextual by
construction: identical tokens get identical vectors regardless of
position.

KPE1 layout (little-endian): magic "KPE1", uint32 dimension, then per
document: uint32 id byte length, UTF-8 id, uint32 token count n, and
n * d float32 values row-major.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

KPE1_MAGIC = b"KPE1"


@dataclass
class ContextualEmbeddings:
    doc_id: str
    H: np.ndarray  # (n_tokens, d_c)


def pool_subwords(groups) -> list[np.ndarray]:
    """Mean-pool sub-word vectors into one vector per word."""
    pooled = []
    for i, group in enumerate(groups):
        vecs = [np.asarray(v, dtype=np.float64) for v in group]
        if not vecs:
            raise ValueError(f"word {i} has no sub-word vectors to pool")
        pooled.append(np.mean(vecs, axis=0))
    return pooled


def write_kpe1(path, d_c: int, docs) -> None:
    """Write (doc_id, matrix) pairs; each matrix is (n_tokens, d_c)."""
    with open(path, "wb") as fh:
        fh.write(KPE1_MAGIC)
        fh.write(struct.pack("<I", d_c))
        for doc_id, H in docs:
            H = np.ascontiguousarray(H, dtype="<f4")
            if H.ndim != 2 or H.shape[1] != d_c:
                raise ValueError(
                    f"document {doc_id!r}: matrix shape {H.shape} does not "
                    f"match dimension {d_c}"
                )
            id_bytes = doc_id.encode("utf-8")
            fh.write(struct.pack("<I", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<I", H.shape[0]))
            fh.write(H.tobytes())


def read_kpe1(path):
    """Read a KPE1 file into (d_c, {doc_id: float32 matrix})."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != KPE1_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        (d_c,) = struct.unpack("<I", fh.read(4))
        docs: dict[str, np.ndarray] = {}
        while True:
            head = fh.read(4)
            if not head:
                break
            (id_len,) = struct.unpack("<I", head)
            doc_id = fh.read(id_len).decode("utf-8")
            (n,) = struct.unpack("<I", fh.read(4))
            raw = fh.read(4 * n * d_c)
            if len(raw) != 4 * n * d_c:
                raise ValueError(f"{path}: truncated rows for document {doc_id!r}")
            docs[doc_id] = np.frombuffer(raw, dtype="<f4").reshape(n, d_c)
    return d_c, docs


@dataclass
class HashedProvider:
    """Deterministic unit vectors keyed by (seed, lowercased token)."""

    d_c: int = 192
    seed: int = 0
    kind: str = "hashed"
    _cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def vector(self, token: str) -> np.ndarray:
        key = token.lower()
        vec = self._cache.get(key)
        if vec is None:
            digest = hashlib.blake2b(
                key.encode("utf-8"),
                digest_size=8,
                key=struct.pack("<q", self.seed),
            ).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            vec = rng.standard_normal(self.d_c)
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec = vec / norm
            self._cache[key] = vec
        return vec

    def embed(self, doc) -> ContextualEmbeddings:
        H = np.stack([self.vector(t) for t in doc.tokens]) if doc.tokens else (
            np.zeros((0, self.d_c))
        )
        return ContextualEmbeddings(doc.id, H)


@dataclass
class FileProvider:
    """Embeddings read verbatim from a KPE1 file."""

    path: str
    kind: str = "file"
    d_c: int = 0
    _docs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.d_c, self._docs = read_kpe1(self.path)

    def embed(self, doc) -> ContextualEmbeddings:
        if doc.id not in self._docs:
            raise KeyError(f"embedding file has no rows for document {doc.id!r}")
        H = self._docs[doc.id]
        if H.shape[0] != len(doc.tokens):
            raise ValueError(
                f"document {doc.id!r}: embedding file has {H.shape[0]} rows "
                f"but the document has {len(doc.tokens)} tokens"
            )
        return ContextualEmbeddings(doc.id, H.astype(np.float64))


def embed_document(provider, doc) -> ContextualEmbeddings:
    """Per-token embeddings for one document, aligned 1:1 with tokens."""
    return provider.embed(doc)


def make_provider(spec: str, hashed_dim: int = 192):
    """Build a provider from a CLI spec: 'hashed:SEED' or a file path."""
    if spec.startswith("hashed:"):
        return HashedProvider(d_c=hashed_dim, seed=int(spec.split(":", 1)[1]))
    if spec == "hashed":
        return HashedProvider(d_c=hashed_dim, seed=0)
    return FileProvider(spec)
