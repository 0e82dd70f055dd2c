"""Exact-match keyphrase evaluation: Precision@k, Recall@k, F1@k.

Gold and predicted phrases are compared after a shared normalization:
lowercase, Unicode punctuation replaced by spaces, and each remaining
word Porter-stemmed. Precision uses the min(|predicted@k|, k)
denominator, recall divides by the gold count, and 0/0 cases are scored
as 0.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from . import porter

ALL = None  # sentinel for k = K (score every prediction)


def _strip_punctuation(text: str) -> str:
    out = []
    for ch in text:
        if unicodedata.category(ch).startswith("P"):
            out.append(" ")
        else:
            out.append(ch)
    return "".join(out)


def normalize_phrase(phrase: str) -> str:
    """Lowercase, drop punctuation, stem each word, rejoin with spaces."""
    cleaned = _strip_punctuation(phrase.lower())
    return " ".join(porter.stem(tok) for tok in cleaned.split())


def _normalized_unique(phrases) -> list[str]:
    """Normalize and deduplicate, preserving first-seen order."""
    seen = []
    for p in phrases:
        norm = normalize_phrase(p)
        if norm and norm not in seen:
            seen.append(norm)
    return seen


@dataclass
class DocScore:
    doc_id: str
    precision: float
    recall: float
    f1: float
    n_gold: int
    n_predicted: int
    n_matched: int

    def to_dict(self) -> dict:
        return {
            "id": self.doc_id,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_gold": self.n_gold,
            "n_predicted": self.n_predicted,
            "n_matched": self.n_matched,
        }


@dataclass
class EvalReport:
    k: int | None
    docs: list[DocScore] = field(default_factory=list)
    skipped_empty_gold: int = 0

    @property
    def mean_precision(self) -> float:
        return sum(d.precision for d in self.docs) / len(self.docs) if self.docs else 0.0

    @property
    def mean_recall(self) -> float:
        return sum(d.recall for d in self.docs) / len(self.docs) if self.docs else 0.0

    @property
    def mean_f1(self) -> float:
        return sum(d.f1 for d in self.docs) / len(self.docs) if self.docs else 0.0

    def to_dict(self) -> dict:
        return {
            "k": "all" if self.k is None else self.k,
            "mean_precision": self.mean_precision,
            "mean_recall": self.mean_recall,
            "mean_f1": self.mean_f1,
            "n_documents": len(self.docs),
            "skipped_empty_gold": self.skipped_empty_gold,
            "documents": [d.to_dict() for d in self.docs],
        }


def f1_at_k(gold, predicted, k: int | None = ALL, doc_id: str = "") -> DocScore:
    """Score one document's ordered predictions against its gold set.

    ``k=ALL`` scores every (normalized, deduplicated) prediction, i.e.
    k equals the number of predicted keyphrases.
    """
    if k is not None and k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    gold_norm = set(_normalized_unique(gold))
    if not gold_norm:
        raise ValueError("gold keyphrase set is empty after normalization")
    pred_norm = _normalized_unique(predicted)
    k_eff = len(pred_norm) if k is None else k
    top_k = pred_norm[:k_eff]
    matched = len(gold_norm.intersection(top_k))
    denom = min(len(top_k), k_eff)
    precision = matched / denom if denom > 0 else 0.0
    recall = matched / len(gold_norm)
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return DocScore(doc_id, precision, recall, f1, len(gold_norm), len(top_k), matched)


def evaluate_corpus(gold: dict, predicted: dict, k: int | None = ALL) -> EvalReport:
    """Macro-average F1@k over documents.

    ``gold`` maps doc id -> iterable of gold phrases, ``predicted`` maps
    doc id -> ordered list of predicted phrases. Documents whose gold set
    is empty (or normalizes to empty) are skipped and counted. A gold
    document without a prediction row is an error; an empty prediction
    list is fine and scores 0.
    """
    report = EvalReport(k=k)
    for doc_id, gold_phrases in gold.items():
        gold_norm = _normalized_unique(gold_phrases)
        if not gold_norm:
            report.skipped_empty_gold += 1
            continue
        if doc_id not in predicted:
            raise KeyError(f"no prediction row for document {doc_id!r}")
        report.docs.append(f1_at_k(gold_norm, predicted[doc_id], k=k, doc_id=doc_id))
    return report
