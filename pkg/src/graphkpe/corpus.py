"""Corpus ingestion: JSONL documents, tokenization, BIO label projection.

One document per line, UTF-8, with fields ``id``, ``tokens`` (or raw
``text``), optional ``keyphrases`` and optional ``tags``. Raw text is
whitespace-tokenized with leading/trailing punctuation detached as
separate tokens.
"""

from __future__ import annotations

import dataclasses
import json
import unicodedata
from dataclasses import dataclass

from .evaluation import normalize_phrase

BIO_LABELS = ("B", "I", "O")


class CorpusError(ValueError):
    """Malformed corpus file or record."""


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]
    gold_keyphrases: frozenset[str] | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.labels is not None:
            if len(self.labels) != len(self.tokens):
                raise CorpusError(
                    f"document {self.id!r}: {len(self.labels)} labels for "
                    f"{len(self.tokens)} tokens"
                )
            prev = "O"
            for t, lab in enumerate(self.labels):
                if lab not in BIO_LABELS:
                    raise CorpusError(f"document {self.id!r}: bad tag {lab!r}")
                if lab == "I" and prev == "O":
                    raise CorpusError(
                        f"document {self.id!r}: I tag at position {t} "
                        "not preceded by B or I"
                    )
                prev = lab


@dataclass
class CorpusSplit:
    name: str
    documents: list[Document]

    def __post_init__(self):
        if self.name not in ("train", "validation", "test"):
            raise CorpusError(f"bad split name {self.name!r}")
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __iter__(self):
        return iter(self.documents)

    def __len__(self):
        return len(self.documents)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize_text(text: str) -> list[str]:
    """Split on whitespace, detaching leading/trailing punctuation.

    Interior punctuation (hyphens, apostrophes) stays attached, so
    "state-of-the-art." becomes ["state-of-the-art", "."].
    """
    tokens: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        while chunk and _is_punct(chunk[0]):
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and _is_punct(chunk[-1]):
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


def _parse_record(obj: dict, lineno: int) -> Document:
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: record is not an object")
    doc_id = obj.get("id")
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusError(f"line {lineno}: missing or invalid 'id'")
    if "tokens" in obj:
        tokens = obj["tokens"]
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise CorpusError(f"line {lineno}: 'tokens' must be a list of strings")
    elif "text" in obj:
        if not isinstance(obj["text"], str):
            raise CorpusError(f"line {lineno}: 'text' must be a string")
        tokens = tokenize_text(obj["text"])
    else:
        raise CorpusError(f"line {lineno}: record needs 'tokens' or 'text'")
    gold = None
    if obj.get("keyphrases") is not None:
        kps = obj["keyphrases"]
        if not isinstance(kps, list) or not all(isinstance(k, str) for k in kps):
            raise CorpusError(f"line {lineno}: 'keyphrases' must be a list of strings")
        gold = frozenset(kps)
    labels = None
    if obj.get("tags") is not None:
        tags = obj["tags"]
        if not isinstance(tags, list):
            raise CorpusError(f"line {lineno}: 'tags' must be a list")
        labels = tuple(tags)
    try:
        return Document(doc_id, tuple(tokens), gold, labels)
    except CorpusError as exc:
        raise CorpusError(f"line {lineno}: {exc}") from exc


def load_corpus(path, format: str = "jsonl", name: str = "train") -> CorpusSplit:
    """Load a JSONL corpus file into a named split, in file order."""
    if format != "jsonl":
        raise CorpusError(f"unsupported corpus format {format!r}")
    documents = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
            if isinstance(obj, dict) and "_meta" in obj:
                continue
            documents.append(_parse_record(obj, lineno))
    if not documents:
        raise CorpusError(f"{path}: empty corpus")
    return CorpusSplit(name, documents)


def write_corpus(path, documents) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in documents:
            rec = {"id": doc.id, "tokens": list(doc.tokens)}
            if doc.gold_keyphrases is not None:
                rec["keyphrases"] = sorted(doc.gold_keyphrases)
            if doc.labels is not None:
                rec["tags"] = list(doc.labels)
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def derive_bio_labels(doc: Document) -> Document:
    """Project gold keyphrases onto the token sequence as B/I/O labels.

    A span matches when its normalized form (shared with the evaluation
    module) equals a normalized gold phrase. Overlaps resolve
    leftmost-longest; spans must start and end on tokens that survive
    normalization, so detached punctuation is never labeled B.
    """
    if doc.gold_keyphrases is None:
        raise CorpusError(f"document {doc.id!r} has no gold keyphrases")
    gold_norm = {normalize_phrase(kp) for kp in doc.gold_keyphrases}
    gold_norm.discard("")
    n = len(doc.tokens)
    norm_tok = [normalize_phrase(t) for t in doc.tokens]
    max_words = max((len(g.split()) for g in gold_norm), default=0)
    labels = ["O"] * n
    i = 0
    while i < n:
        if not gold_norm or not norm_tok[i]:
            i += 1
            continue
        # candidate span ends: positions with nonempty norms, while the
        # span holds at most max_words normalized words
        ends = []
        nonempty = 0
        j = i
        while j < n:
            if norm_tok[j]:
                nonempty += 1
                if nonempty > max_words:
                    break
                ends.append(j)
            j += 1
        matched_end = None
        for j in reversed(ends):
            span = " ".join(s for s in norm_tok[i : j + 1] if s)
            if span in gold_norm:
                matched_end = j
                break
        if matched_end is None:
            i += 1
            continue
        labels[i] = "B"
        for t in range(i + 1, matched_end + 1):
            labels[t] = "I"
        i = matched_end + 1
    return dataclasses.replace(doc, labels=tuple(labels))
