"""Run configuration: defaults, key=value config files, flag overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass
class RunConfig:
    window: int = 4
    neg_ratio: int = 5
    gcn_dim: int = 192
    gcn_depth: int = 2
    gcn_epochs: int = 5
    gcn_lr: float = 0.05
    batch: int = 10
    tagger_epochs: int = 100
    patience: int = 5
    anneal: float = 0.5
    lr: float = 5e-4
    proj_dim: int = 192
    chunk_limit: int = 512
    emb_dim: int = 192  # hashed-provider dimension; file providers self-describe
    seed: int = 0
    graph_scope: str = "document"  # or "corpus"
    no_graph: bool = False
    embeddings: str = "hashed:0"
    train_path: str | None = None
    val_path: str | None = None
    test_path: str | None = None
    out_dir: str = "runs/out"
    jobs: int = 1

    def validate(self) -> "RunConfig":
        positive = (
            "window", "neg_ratio", "gcn_dim", "gcn_depth", "gcn_epochs",
            "batch", "tagger_epochs", "patience", "proj_dim", "chunk_limit",
            "emb_dim", "jobs",
        )
        for name in positive:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.anneal <= 1.0:
            raise ValueError(f"anneal must be in (0, 1], got {self.anneal}")
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.graph_scope not in ("document", "corpus"):
            raise ValueError(f"graph_scope must be document|corpus, got {self.graph_scope}")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def gcn_dims(self) -> list[int]:
        return [self.gcn_dim] * (self.gcn_depth + 1)


def _parse_value(raw: str):
    raw = raw.strip()
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config_file(path) -> dict:
    """Parse a key = value config file (TOML-style scalars, # comments)."""
    values: dict = {}
    valid = {f.name for f in dataclasses.fields(RunConfig)}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected key = value")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in valid:
                raise ValueError(f"{path}: line {lineno}: unknown key {key!r}")
            values[key] = _parse_value(raw)
    return values


def build_config(file_path=None, **overrides) -> RunConfig:
    """Defaults, then config file values, then explicit overrides."""
    values = load_config_file(file_path) if file_path else {}
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    return RunConfig(**values).validate()
