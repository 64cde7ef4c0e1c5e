"""Embedding jobs: read raw texts, attach vectors, write interchange files.

Input is either a plain text file (one text per line) or JSONL. JSONL
records may be corpus-shaped (``id``/``text``/``label``) or dataset-shaped
(``id``/``text``/``fact_label``/``foil_label``/``counterfactuals`` and an
optional nested ``adversarial`` object with its own counterfactuals); every
text in the record tree gains ``tokens``, ``sentence_embedding``, and
``token_embeddings``. The output starts with the interchange header
``{"schema": "faithbench/v1", "dim": D, "labels": [...]}`` that the
evaluation engine validates against, and is byte-deterministic for a fixed
model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .models import DEFAULT_MAX_TOKENS, EmbedError, load_model

SCHEMA_NAME = "faithbench/v1"


@dataclass(frozen=True)
class EmbedJob:
    input_path: str | Path
    model_id: str
    output_path: str | Path
    default_label: str = "unlabeled"
    max_tokens: int = DEFAULT_MAX_TOKENS


@dataclass
class EmbedResult:
    records: int
    texts_embedded: int
    dimension: int
    labels: tuple[str, ...]
    warnings: list[str] = field(default_factory=list)


def _vector_json(vec: np.ndarray) -> list[float]:
    return [float(x) for x in vec]


class _Embedder:
    """Wraps a provider, collecting labels and truncation warnings."""

    def __init__(self, model, default_label: str):
        self.model = model
        self.default_label = default_label
        self.labels: set[str] = set()
        self.warnings: list[str] = []
        self.texts_embedded = 0

    def attach(self, obj: dict, owner: str) -> None:
        text = obj.get("text")
        if not isinstance(text, str) or not text.strip():
            raise EmbedError(f"{owner}: record needs a nonempty \"text\" string")
        encoded = self.model.encode(text)
        if encoded.truncated:
            self.warnings.append(
                f"{owner}: text truncated to {self.model.max_tokens} tokens"
            )
        obj["tokens"] = list(encoded.tokens)
        obj["sentence_embedding"] = _vector_json(encoded.sentence_embedding)
        obj["token_embeddings"] = [_vector_json(v) for v in encoded.token_embeddings]
        self.texts_embedded += 1

    def claim_label(self, value, owner: str, key: str) -> str:
        if value is None:
            value = self.default_label
        if not isinstance(value, str) or not value:
            raise EmbedError(f"{owner}: {key} must be a nonempty string")
        self.labels.add(value)
        return value


def _embed_dataset_record(embedder: _Embedder, obj: dict, owner: str) -> None:
    obj["fact_label"] = embedder.claim_label(obj.get("fact_label"), owner, "fact_label")
    obj["foil_label"] = embedder.claim_label(obj.get("foil_label"), owner, "foil_label")
    embedder.attach(obj, owner)
    counterfactuals = obj.get("counterfactuals")
    if not isinstance(counterfactuals, list) or not counterfactuals:
        raise EmbedError(f"{owner}: dataset record needs a nonempty counterfactuals array")
    for i, cf in enumerate(counterfactuals):
        if not isinstance(cf, dict):
            raise EmbedError(f"{owner}: counterfactual {i} must be an object")
        embedder.attach(cf, f"{owner} counterfactual {i}")
    if obj.get("adversarial") is not None:
        adversarial = obj["adversarial"]
        if not isinstance(adversarial, dict):
            raise EmbedError(f"{owner}: adversarial must be an object")
        _embed_adversarial(embedder, adversarial, owner)


def _embed_adversarial(embedder: _Embedder, adversarial: dict, owner: str) -> None:
    embedder.attach(adversarial, f"{owner} adversarial")
    counterfactuals = adversarial.get("counterfactuals")
    if not isinstance(counterfactuals, list) or not counterfactuals:
        raise EmbedError(
            f"{owner}: adversarial record needs a nonempty counterfactuals array"
        )
    for i, cf in enumerate(counterfactuals):
        if not isinstance(cf, dict):
            raise EmbedError(f"{owner}: adversarial counterfactual {i} must be an object")
        embedder.attach(cf, f"{owner} adversarial counterfactual {i}")


def read_input_records(path: str | Path, default_label: str) -> list[dict]:
    """Plain text file -> corpus-shaped records; JSONL -> parsed objects."""
    path = Path(path)
    if not path.exists():
        raise EmbedError(f"no such input file: {path}")
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise EmbedError(f"{path.name}: input file has no texts")
    try:
        first = json.loads(lines[0])
        is_jsonl = isinstance(first, dict)
    except json.JSONDecodeError:
        is_jsonl = False
    if not is_jsonl:
        return [
            {"id": f"t{i:05d}", "text": line.strip(), "label": default_label}
            for i, line in enumerate(lines)
        ]
    records = []
    for line_no, raw in enumerate(lines, start=1):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise EmbedError(f"{path.name}:{line_no}: malformed JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise EmbedError(f"{path.name}:{line_no}: expected a JSON object")
        records.append(obj)
    return records


def embed_texts(job: EmbedJob) -> EmbedResult:
    """Embed every text in the input and write an interchange JSONL file."""
    model = load_model(job.model_id, max_tokens=job.max_tokens)
    records = read_input_records(job.input_path, job.default_label)
    embedder = _Embedder(model, job.default_label)
    for i, obj in enumerate(records):
        if not obj.get("id"):
            obj["id"] = f"t{i:05d}"
        owner = str(obj["id"])
        if "counterfactuals" in obj:
            _embed_dataset_record(embedder, obj, owner)
        else:
            obj["label"] = embedder.claim_label(obj.get("label"), owner, "label")
            embedder.attach(obj, owner)

    header = {
        "schema": SCHEMA_NAME,
        "dim": model.dimension,
        "labels": sorted(embedder.labels),
        "model": model.name,
        "pooling": "mean",
    }
    out_path = Path(job.output_path)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for obj in records:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
    return EmbedResult(
        records=len(records),
        texts_embedded=embedder.texts_embedded,
        dimension=model.dimension,
        labels=tuple(sorted(embedder.labels)),
        warnings=embedder.warnings,
    )
