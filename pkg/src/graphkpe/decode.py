"""Assemble ranked keyphrases from per-token BIO predictions.

Spans are maximal runs of one B followed by I tags; an orphan I (after O
or at sequence start) is repaired to B rather than dropped. A span's
score is the mean of its tokens' top class probabilities. Duplicate
phrases (same normalized form) merge keeping the best score; output is
sorted by score descending, ties by first occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluation import normalize_phrase
from .tagger import TagPrediction


@dataclass
class ScoredPhrase:
    text: str
    score: float


@dataclass
class KeyphraseSet:
    phrases: list[ScoredPhrase]

    @property
    def K(self) -> int:
        return len(self.phrases)

    def texts(self) -> list[str]:
        return [p.text for p in self.phrases]

    def to_record(self, doc_id: str) -> dict:
        return {
            "id": doc_id,
            "keyphrases": [
                {"text": p.text, "score": p.score} for p in self.phrases
            ],
        }


def decode_bio(tokens, prediction: TagPrediction) -> KeyphraseSet:
    tokens = list(tokens)
    labels = prediction.labels
    if len(tokens) != len(labels):
        raise ValueError(
            f"{len(tokens)} tokens but {len(labels)} predicted labels"
        )
    token_conf = (
        np.max(prediction.probs, axis=1) if len(tokens) else np.zeros(0)
    )
    spans: list[tuple[int, int]] = []  # inclusive [start, end]
    start = None
    for t, lab in enumerate(labels):
        if lab == "O":
            if start is not None:
                spans.append((start, t - 1))
                start = None
        elif lab == "B":
            if start is not None:
                spans.append((start, t - 1))
            start = t
        else:  # I continues a span; orphan I starts one (repair)
            if start is None:
                start = t
    if start is not None:
        spans.append((start, len(labels) - 1))

    merged: dict[str, tuple[float, int, str]] = {}  # norm -> (score, order, text)
    for order, (s, e) in enumerate(spans):
        text = " ".join(tokens[s : e + 1])
        norm = normalize_phrase(text)
        if not norm:
            continue  # punctuation-only span has no usable surface form
        score = float(np.mean(token_conf[s : e + 1]))
        if norm not in merged or score > merged[norm][0]:
            prev_order = merged[norm][1] if norm in merged else order
            merged[norm] = (score, prev_order, text)

    ranked = sorted(merged.values(), key=lambda item: (-item[0], item[1]))
    return KeyphraseSet([ScoredPhrase(text, score) for score, _, text in ranked])
