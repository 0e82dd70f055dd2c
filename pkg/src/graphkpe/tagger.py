"""Graph-enhanced BIO sequence tagger.

Each token's graph embedding and contextual embedding pass through
separate linear+ReLU projections, get concatenated, and a linear map +
softmax yields probabilities over {B, I, O}. The head is token-wise, so
long inputs are processed in non-overlapping windows (stride = window)
and per-chunk predictions concatenate exactly.

Training minimizes token-level cross-entropy with AdamW (decoupled
weight decay), mini-batches of documents, validation-loss checkpointing
and patience-based learning-rate annealing. With ``no_graph`` the graph
projection is pinned to zero, which reduces the model exactly to the
contextual-only baseline used for ablation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

CLASSES = ("B", "I", "O")
CLASS_INDEX = {c: i for i, c in enumerate(CLASSES)}


@dataclass
class TaggerModel:
    P_g: np.ndarray  # (p, d_g)
    b_g: np.ndarray  # (p,)
    P_c: np.ndarray  # (p, d_c)
    b_c: np.ndarray  # (p,)
    C: np.ndarray  # (3, 2p)
    b_out: np.ndarray  # (3,)

    @property
    def p(self) -> int:
        return self.P_g.shape[0]

    @property
    def d_g(self) -> int:
        return self.P_g.shape[1]

    @property
    def d_c(self) -> int:
        return self.P_c.shape[1]

    def params(self) -> dict[str, np.ndarray]:
        return {
            "P_g": self.P_g,
            "b_g": self.b_g,
            "P_c": self.P_c,
            "b_c": self.b_c,
            "C": self.C,
            "b_out": self.b_out,
        }

    def copy(self) -> "TaggerModel":
        return TaggerModel(
            self.P_g.copy(), self.b_g.copy(), self.P_c.copy(),
            self.b_c.copy(), self.C.copy(), self.b_out.copy(),
        )


@dataclass
class TagPrediction:
    probs: np.ndarray  # (n, 3) rows sum to 1
    labels: tuple[str, ...]

    @classmethod
    def from_probs(cls, probs: np.ndarray) -> "TagPrediction":
        labels = tuple(CLASSES[i] for i in np.argmax(probs, axis=1))
        return cls(probs, labels)

    @classmethod
    def from_labels(cls, labels) -> "TagPrediction":
        probs = np.zeros((len(labels), 3))
        for t, lab in enumerate(labels):
            probs[t, CLASS_INDEX[lab]] = 1.0
        return cls(probs, tuple(labels))


@dataclass
class DocFeatures:
    """Aligned per-token inputs and (for training) gold label ids."""

    doc_id: str
    z: np.ndarray  # (n, d_g)
    h: np.ndarray  # (n, d_c)
    y: np.ndarray | None = None  # (n,) int class ids


@dataclass
class TaggerHyper:
    batch: int = 10
    epochs: int = 100
    lr: float = 5e-4
    patience: int = 5
    anneal: float = 0.5
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_tagger(d_g: int, d_c: int, p: int, seed: int) -> TaggerModel:
    rng = np.random.default_rng(seed)

    def glorot(rows, cols):
        a = np.sqrt(6.0 / (rows + cols))
        return rng.uniform(-a, a, size=(rows, cols))

    return TaggerModel(
        P_g=glorot(p, d_g),
        b_g=np.zeros(p),
        P_c=glorot(p, d_c),
        b_c=np.zeros(p),
        C=glorot(3, 2 * p),
        b_out=np.zeros(3),
    )


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


def _forward_parts(model: TaggerModel, z: np.ndarray, h: np.ndarray):
    pre_g = z @ model.P_g.T + model.b_g
    pre_c = h @ model.P_c.T + model.b_c
    a_g = np.maximum(pre_g, 0.0)
    a_c = np.maximum(pre_c, 0.0)
    u = np.hstack([a_g, a_c])
    logits = u @ model.C.T + model.b_out
    return pre_g, pre_c, u, logits


def tag_forward(model: TaggerModel, z_seq, h_seq) -> TagPrediction:
    """Per-token class probabilities for aligned embedding sequences."""
    z = np.asarray(z_seq, dtype=np.float64)
    h = np.asarray(h_seq, dtype=np.float64)
    if z.shape[0] != h.shape[0]:
        raise ValueError(
            f"graph and contextual sequences differ in length: "
            f"{z.shape[0]} vs {h.shape[0]}"
        )
    _, _, _, logits = _forward_parts(model, z, h)
    return TagPrediction.from_probs(_softmax(logits))


def chunk_sequence(n: int, limit: int) -> list[tuple[int, int]]:
    """Non-overlapping [start, end) spans of at most ``limit`` tokens.

    Stride equals the window size, so spans partition [0, n).
    """
    if limit < 1:
        raise ValueError(f"chunk limit must be >= 1, got {limit}")
    return [(start, min(start + limit, n)) for start in range(0, n, limit)]


def predict_document(model: TaggerModel, z_seq, h_seq, limit: int) -> TagPrediction:
    """Tag a document window by window and concatenate the predictions."""
    z = np.asarray(z_seq, dtype=np.float64)
    h = np.asarray(h_seq, dtype=np.float64)
    n = z.shape[0]
    if n == 0:
        return TagPrediction(np.zeros((0, 3)), ())
    parts = [
        tag_forward(model, z[s:e], h[s:e]).probs for s, e in chunk_sequence(n, limit)
    ]
    return TagPrediction.from_probs(np.vstack(parts))


def _loss_and_grads(model: TaggerModel, z, h, y):
    """Mean token cross-entropy and gradients for every parameter."""
    n = len(y)
    pre_g, pre_c, u, logits = _forward_parts(model, z, h)
    probs = _softmax(logits)
    loss = float(-np.mean(np.log(probs[np.arange(n), y] + 1e-300)))
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    p = model.p
    grads = {
        "C": dlogits.T @ u,
        "b_out": dlogits.sum(axis=0),
    }
    du = dlogits @ model.C
    da_g = du[:, :p] * (pre_g > 0)
    da_c = du[:, p:] * (pre_c > 0)
    grads["P_g"] = da_g.T @ z
    grads["b_g"] = da_g.sum(axis=0)
    grads["P_c"] = da_c.T @ h
    grads["b_c"] = da_c.sum(axis=0)
    return loss, grads


def _batch_arrays(bundles: list[DocFeatures]):
    z = np.vstack([b.z for b in bundles])
    h = np.vstack([b.h for b in bundles])
    y = np.concatenate([b.y for b in bundles])
    return z, h, y


def _validation_loss(model: TaggerModel, bundles: list[DocFeatures]) -> float:
    z, h, y = _batch_arrays(bundles)
    _, _, _, logits = _forward_parts(model, z, h)
    probs = _softmax(logits)
    return float(-np.mean(np.log(probs[np.arange(len(y)), y] + 1e-300)))


def train_tagger(
    model: TaggerModel,
    train_bundles: list[DocFeatures],
    val_bundles: list[DocFeatures],
    hyper: TaggerHyper,
    seed: int = 0,
    no_graph: bool = False,
):
    """AdamW training with validation checkpointing and lr annealing.

    Documents shuffle deterministically per epoch; each mini-batch of
    documents contributes one update on the mean cross-entropy over its
    tokens. When validation loss fails to improve for ``patience``
    consecutive epochs the learning rate is multiplied by ``anneal``.
    Returns the best-validation checkpoint and the epoch log.
    """
    for bundle in train_bundles + val_bundles:
        if bundle.y is None:
            raise ValueError(f"document {bundle.doc_id!r} has no labels")
    if no_graph:
        model.P_g[...] = 0.0
        model.b_g[...] = 0.0
    frozen = {"P_g", "b_g"} if no_graph else set()

    params = model.params()
    m_state = {k: np.zeros_like(v) for k, v in params.items()}
    v_state = {k: np.zeros_like(v) for k, v in params.items()}
    step = 0
    lr = hyper.lr
    rng = np.random.default_rng(seed)
    best_val = np.inf
    best_params = model.copy()
    bad_epochs = 0
    log: list[dict] = []

    n_docs = len(train_bundles)
    for epoch in range(1, hyper.epochs + 1):
        order = rng.permutation(n_docs)
        total_loss = 0.0
        total_tokens = 0
        for start in range(0, n_docs, hyper.batch):
            batch = [train_bundles[i] for i in order[start : start + hyper.batch]]
            z, h, y = _batch_arrays(batch)
            loss, grads = _loss_and_grads(model, z, h, y)
            if not np.isfinite(loss):
                raise RuntimeError(f"non-finite training loss at epoch {epoch}")
            total_loss += loss * len(y)
            total_tokens += len(y)
            step += 1
            bc1 = 1.0 - hyper.beta1**step
            bc2 = 1.0 - hyper.beta2**step
            for name, value in params.items():
                if name in frozen:
                    continue
                g = grads[name]
                m_state[name] = hyper.beta1 * m_state[name] + (1 - hyper.beta1) * g
                v_state[name] = hyper.beta2 * v_state[name] + (1 - hyper.beta2) * g * g
                m_hat = m_state[name] / bc1
                v_hat = v_state[name] / bc2
                value -= lr * (m_hat / (np.sqrt(v_hat) + hyper.eps))
                value -= lr * hyper.weight_decay * value

        val_loss = _validation_loss(model, val_bundles) if val_bundles else (
            total_loss / max(total_tokens, 1)
        )
        log.append(
            {
                "epoch": epoch,
                "train_loss": total_loss / max(total_tokens, 1),
                "val_loss": val_loss,
                "lr": lr,
            }
        )
        if val_loss < best_val:
            best_val = val_loss
            best_params = model.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= hyper.patience:
                lr *= hyper.anneal
                bad_epochs = 0

    for name, value in model.params().items():
        value[...] = best_params.params()[name]
    return model, log


def gradcheck_tagger(model: TaggerModel, z, h, y, step: float = 1e-4) -> float:
    """Max relative error of analytic vs central-difference gradients."""
    z = np.asarray(z, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _, grads = _loss_and_grads(model, z, h, y)
    worst = 0.0
    for name, value in model.params().items():
        flat = value.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up, _ = _loss_and_grads(model, z, h, y)
            flat[i] = orig - step
            down, _ = _loss_and_grads(model, z, h, y)
            flat[i] = orig
            fd = (up - down) / (2 * step)
            ana = grads[name].ravel()[i]
            scale = max(abs(fd), abs(ana), 1e-8)
            worst = max(worst, abs(fd - ana) / scale)
    return worst


TAG_MAGIC = b"TAG1"


def save_tagger(model: TaggerModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(TAG_MAGIC)
        fh.write(struct.pack("<III", model.d_g, model.d_c, model.p))
        for name in ("P_g", "b_g", "P_c", "b_c", "C", "b_out"):
            fh.write(
                np.ascontiguousarray(model.params()[name], dtype="<f4").tobytes()
            )


def load_tagger(path) -> TaggerModel:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != TAG_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        d_g, d_c, p = struct.unpack("<III", fh.read(12))

        def read(shape):
            count = int(np.prod(shape))
            raw = fh.read(4 * count)
            if len(raw) != 4 * count:
                raise ValueError(f"{path}: truncated checkpoint")
            return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)

        return TaggerModel(
            P_g=read((p, d_g)),
            b_g=read((p,)),
            P_c=read((p, d_c)),
            b_c=read((p,)),
            C=read((3, 2 * p)),
            b_out=read((3,)),
        )
