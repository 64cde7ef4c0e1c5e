"""Data model and JSONL interchange files for evaluation datasets.

Two file kinds share one self-describing format. The first line of each file
is a header object ``{"schema": "faithbench/v1", "dim": D, "labels": [...]}``;
every following line is one record:

* dataset file — evaluation instances: an original text with fact/foil
  labels, one or more counterfactuals, and an optional adversarial twin
  (which carries its own counterfactuals).
* corpus file — labeled ground-truth texts: ``id``, ``text``, ``label``,
  ``sentence_embedding``.

Embeddings are inline JSON arrays of finite reals. Loaded structures are
immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import EmbeddingIndex

SCHEMA_NAME = "faithbench/v1"

_WHITESPACE = re.compile(r"\s+")


class DatasetError(ValueError):
    """A file violates the interchange schema or its invariants."""


def _tokenize(text: str) -> tuple[str, ...]:
    """Unicode-whitespace split; used when a record omits explicit tokens."""
    return tuple(t for t in _WHITESPACE.split(text.strip()) if t)


@dataclass(frozen=True, eq=False)
class LabeledText:
    """A text with its class label and embedding vectors."""

    id: str
    text: str
    tokens: tuple[str, ...]
    label: str
    sentence_embedding: np.ndarray
    token_embeddings: tuple[np.ndarray, ...] | None = None


@dataclass(frozen=True, eq=False)
class EvaluationInstance:
    """An original text, its foil label, counterfactuals, and optional adversarial twin."""

    original: LabeledText
    foil_label: str
    counterfactuals: tuple[LabeledText, ...]
    adversarial_original: LabeledText | None = None
    adversarial_counterfactuals: tuple[LabeledText, ...] | None = None

    @property
    def id(self) -> str:
        return self.original.id

    @property
    def has_adversarial(self) -> bool:
        return (
            self.adversarial_original is not None
            and self.adversarial_counterfactuals is not None
        )


@dataclass(eq=False)
class GroundTruthCorpus:
    """Labeled reference texts partitioned by class, k-NN-queryable per class."""

    items: tuple[LabeledText, ...]
    labels: tuple[str, ...]
    dimension: int
    by_label: dict[str, tuple[int, ...]] = field(init=False)
    _partitions: dict[str, EmbeddingIndex] = field(init=False, default_factory=dict)

    def __post_init__(self) -> None:
        by_label: dict[str, list[int]] = {label: [] for label in self.labels}
        for i, item in enumerate(self.items):
            by_label[item.label].append(i)
        self.by_label = {label: tuple(rows) for label, rows in by_label.items()}

    def partition_size(self, label: str) -> int:
        return len(self.by_label.get(label, ()))

    def partition(self, label: str) -> EmbeddingIndex:
        """Embedding index over the items of one class (built lazily, cached)."""
        if label not in self._partitions:
            rows = self.by_label.get(label, ())
            if not rows:
                raise DatasetError(f"empty foil class {label!r} in ground-truth corpus")
            members = [self.items[i] for i in rows]
            self._partitions[label] = EmbeddingIndex.build(
                [m.id for m in members], [m.sentence_embedding for m in members]
            )
        return self._partitions[label]

    def item(self, id_: str) -> LabeledText:
        for it in self.items:
            if it.id == id_:
                return it
        raise KeyError(id_)


@dataclass(frozen=True)
class EpsRule:
    """How the connectedness radius is derived: a fixed value, or the mean
    k-th-nearest-neighbor distance within the foil partition."""

    kind: str  # "fixed" | "knn_mean"
    value: float | None = None
    k: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "fixed":
            if self.value is None or self.value <= 0:
                raise ValueError("fixed eps rule needs a positive value")
        elif self.kind == "knn_mean":
            if self.k is not None and self.k < 1:
                raise ValueError("knn_mean eps rule needs k >= 1")
        else:
            raise ValueError(f"unknown eps rule kind {self.kind!r}")


DEFAULT_K_GRID = tuple(range(2, 11))
DEFAULT_STABILITY_BINS = ((0.0, 0.2), (0.2, 0.4), (0.4, 0.6))
DEFAULT_PROXIMITY_EDGES = tuple(round(0.2 * i, 10) for i in range(11))  # 0.0 .. 2.0
DEFAULT_SCORE_EDGES = tuple(round(0.1 * i, 10) for i in range(11))      # 0.0 .. 1.0


@dataclass(frozen=True)
class MetricConfig:
    """All evaluation knobs, validated once at construction."""

    k_grid: tuple[int, ...] = DEFAULT_K_GRID
    eps_rule: EpsRule = EpsRule(kind="knn_mean", k=4)
    stability_bins: tuple[tuple[float, float], ...] = DEFAULT_STABILITY_BINS
    stability_neighbor_radius: float = 0.2
    stability_all_pairs: bool = False
    bleu_max_n: int = 4
    bleu_smoothing: float = 1e-9
    epsilon2: float = 3.0
    min_points: int = 2
    shift_sample_cap: int = 300
    robustness_stability: bool = False
    proximity_bin_edges: tuple[float, ...] = DEFAULT_PROXIMITY_EDGES
    score_bin_edges: tuple[float, ...] = DEFAULT_SCORE_EDGES

    def __post_init__(self) -> None:
        if not self.k_grid or any(k < 1 for k in self.k_grid):
            raise ValueError("k_grid must contain positive integers")
        if any(a >= b for a, b in zip(self.k_grid, self.k_grid[1:])):
            raise ValueError("k_grid must be strictly increasing")
        for lo, hi in self.stability_bins:
            if not lo < hi:
                raise ValueError(f"empty stability bin [{lo}, {hi})")
        for (_, hi), (lo2, _) in zip(self.stability_bins, self.stability_bins[1:]):
            if lo2 < hi:
                raise ValueError("stability bins must be ordered and non-overlapping")
        if self.bleu_max_n < 1:
            raise ValueError("bleu_max_n must be >= 1")
        if self.bleu_smoothing <= 0:
            raise ValueError("bleu_smoothing must be positive")
        if self.stability_neighbor_radius <= 0:
            raise ValueError("stability_neighbor_radius must be positive")
        if self.epsilon2 <= 0:
            raise ValueError("epsilon2 must be positive")
        if self.min_points < 2:
            raise ValueError("min_points must be >= 2")
        if self.shift_sample_cap < 1:
            raise ValueError("shift_sample_cap must be >= 1")


@dataclass(frozen=True)
class ValidationReport:
    """Structural facts about a loaded dataset; warnings only, never errors."""

    n_instances: int
    n_counterfactuals: int
    counterfactuals_per_instance: tuple[int, ...]
    n_with_adversarial: int
    corpus_sizes: dict[str, int]
    empty_foil_labels: tuple[str, ...]
    instances_without_adversarial: tuple[str, ...]
    warnings: tuple[str, ...]


# --- parsing helpers ---------------------------------------------------------


def _fail(name: str, line_no: int, message: str) -> DatasetError:
    return DatasetError(f"{name}:{line_no}: {message}")


def _iter_json_lines(lines, name: str):
    for line_no, raw in enumerate(lines, start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise _fail(name, line_no, f"malformed JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise _fail(name, line_no, "expected a JSON object")
        yield line_no, obj


def _parse_header(name: str, line_no: int, obj: dict) -> tuple[int, tuple[str, ...]]:
    if obj.get("schema") != SCHEMA_NAME:
        raise _fail(name, line_no, f'first line must be a header with "schema": "{SCHEMA_NAME}"')
    dim = obj.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise _fail(name, line_no, "header dim must be a positive integer")
    labels = obj.get("labels")
    if (
        not isinstance(labels, list)
        or not labels
        or any(not isinstance(x, str) for x in labels)
    ):
        raise _fail(name, line_no, "header labels must be a nonempty list of strings")
    if len(set(labels)) != len(labels):
        raise _fail(name, line_no, "header labels must be unique")
    return dim, tuple(labels)


def _parse_embedding(name: str, line_no: int, value, dim: int, what: str) -> np.ndarray:
    if value is None:
        raise _fail(name, line_no, f"missing embedding: {what}")
    if not isinstance(value, list) or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) for x in value
    ):
        raise _fail(name, line_no, f"{what} must be an array of numbers")
    if any(isinstance(x, float) and not math.isfinite(x) for x in value):
        raise _fail(name, line_no, f"non-finite entry in {what}")
    if len(value) != dim:
        raise _fail(name, line_no, f"{what} has dimension {len(value)}, expected {dim}")
    arr = np.asarray(value, dtype=np.float64)
    if float(np.linalg.norm(arr)) == 0.0:
        raise _fail(name, line_no, f"zero-norm {what}")
    return arr


class _Loader:
    """Shared per-file parsing state: declared dim/labels plus id bookkeeping."""

    def __init__(self, name: str, dim: int, labels: tuple[str, ...]):
        self.name = name
        self.dim = dim
        self.labels = labels
        self.seen_ids: set[str] = set()
        self.token_dim: int | None = None

    def claim_id(self, line_no: int, id_: str) -> str:
        if not isinstance(id_, str) or not id_:
            raise _fail(self.name, line_no, "id must be a nonempty string")
        if id_ in self.seen_ids:
            raise _fail(self.name, line_no, f"duplicate id {id_!r}")
        self.seen_ids.add(id_)
        return id_

    def check_label(self, line_no: int, label, key: str) -> str:
        if not isinstance(label, str):
            raise _fail(self.name, line_no, f"{key} must be a string")
        if label not in self.labels:
            raise _fail(self.name, line_no, f"{key} {label!r} not in declared label set")
        return label

    def labeled_text(self, line_no: int, obj: dict, id_: str, label: str) -> LabeledText:
        text = obj.get("text")
        if not isinstance(text, str):
            raise _fail(self.name, line_no, f"{id_!r}: text must be a string")
        tokens_raw = obj.get("tokens")
        if tokens_raw is None:
            tokens = _tokenize(text)
        else:
            if not isinstance(tokens_raw, list) or any(
                not isinstance(t, str) for t in tokens_raw
            ):
                raise _fail(self.name, line_no, f"{id_!r}: tokens must be a list of strings")
            tokens = tuple(tokens_raw)
        sentence = _parse_embedding(
            self.name, line_no, obj.get("sentence_embedding"), self.dim,
            f"sentence_embedding of {id_!r}",
        )
        token_embs = None
        if obj.get("token_embeddings") is not None:
            raw = obj["token_embeddings"]
            if not isinstance(raw, list):
                raise _fail(self.name, line_no, f"{id_!r}: token_embeddings must be a list")
            if len(raw) != len(tokens):
                raise _fail(
                    self.name, line_no,
                    f"{id_!r}: {len(raw)} token embeddings for {len(tokens)} tokens",
                )
            vectors = []
            for t_i, vec in enumerate(raw):
                if not isinstance(vec, list) or not vec:
                    raise _fail(
                        self.name, line_no,
                        f"{id_!r}: token embedding {t_i} must be a nonempty array",
                    )
                if self.token_dim is None:
                    self.token_dim = len(vec)
                vectors.append(
                    _parse_embedding(
                        self.name, line_no, vec, self.token_dim,
                        f"token embedding {t_i} of {id_!r}",
                    )
                )
            token_embs = tuple(vectors)
        return LabeledText(
            id=id_,
            text=text,
            tokens=tokens,
            label=label,
            sentence_embedding=sentence,
            token_embeddings=token_embs,
        )


def _parse_counterfactuals(
    loader: _Loader, line_no: int, obj: dict, owner_id: str, foil_label: str, prefix: str
) -> tuple[LabeledText, ...]:
    raw = obj.get("counterfactuals")
    if not isinstance(raw, list) or not raw:
        raise _fail(
            loader.name, line_no, f"{owner_id!r}: counterfactuals must be a nonempty array"
        )
    out = []
    for i, cf in enumerate(raw):
        if not isinstance(cf, dict):
            raise _fail(loader.name, line_no, f"{owner_id!r}: counterfactual {i} must be an object")
        cf_id = loader.claim_id(line_no, cf.get("id") or f"{owner_id}#{prefix}{i}")
        declared = cf.get("label")
        if declared is not None and declared != foil_label:
            raise _fail(
                loader.name, line_no,
                f"counterfactual {cf_id!r} carries label {declared!r}, "
                f"expected foil label {foil_label!r}",
            )
        out.append(loader.labeled_text(line_no, cf, cf_id, foil_label))
    return tuple(out)


def _read_text(path: str | Path) -> tuple[str, str]:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"no such file: {path}")
    return path.read_text(encoding="utf-8"), path.name


def loads_corpus(content: str, name: str = "corpus") -> GroundTruthCorpus:
    """Parse and validate ground-truth corpus JSONL from a string."""
    lines = _iter_json_lines(content.splitlines(), name)
    try:
        line_no, header = next(lines)
    except StopIteration:
        raise DatasetError(f"{name}: empty file, expected a header line") from None
    dim, labels = _parse_header(name, line_no, header)
    loader = _Loader(name, dim, labels)
    items = []
    for line_no, obj in lines:
        id_ = loader.claim_id(line_no, obj.get("id"))
        label = loader.check_label(line_no, obj.get("label"), "label")
        items.append(loader.labeled_text(line_no, obj, id_, label))
    return GroundTruthCorpus(items=tuple(items), labels=labels, dimension=dim)


def load_corpus(path: str | Path) -> GroundTruthCorpus:
    """Load and validate a ground-truth corpus JSONL file."""
    content, name = _read_text(path)
    return loads_corpus(content, name)


def loads_instances(
    content: str, name: str = "dataset"
) -> tuple[tuple[EvaluationInstance, ...], int, tuple[str, ...]]:
    """Parse dataset JSONL from a string; returns (instances, dim, labels)."""
    lines = _iter_json_lines(content.splitlines(), name)
    try:
        line_no, header = next(lines)
    except StopIteration:
        raise DatasetError(f"{name}: empty file, expected a header line") from None
    dim, labels = _parse_header(name, line_no, header)
    loader = _Loader(name, dim, labels)
    instances = []
    for line_no, obj in lines:
        id_ = loader.claim_id(line_no, obj.get("id"))
        fact = loader.check_label(line_no, obj.get("fact_label"), "fact_label")
        foil = loader.check_label(line_no, obj.get("foil_label"), "foil_label")
        if fact == foil:
            raise _fail(name, line_no, f"{id_!r}: foil_label equals fact label {fact!r}")
        original = loader.labeled_text(line_no, obj, id_, fact)
        counterfactuals = _parse_counterfactuals(loader, line_no, obj, id_, foil, "cf")

        adv_original = None
        adv_counterfactuals = None
        if obj.get("adversarial") is not None:
            adv = obj["adversarial"]
            if not isinstance(adv, dict):
                raise _fail(name, line_no, f"{id_!r}: adversarial must be an object")
            adv_id = loader.claim_id(line_no, adv.get("id") or f"{id_}#adv")
            adv_original = loader.labeled_text(line_no, adv, adv_id, fact)
            adv_counterfactuals = _parse_counterfactuals(
                loader, line_no, adv, adv_id, foil, "cf"
            )
            if len(adv_counterfactuals) != len(counterfactuals):
                raise _fail(
                    name, line_no,
                    f"{id_!r}: {len(adv_counterfactuals)} adversarial counterfactuals "
                    f"do not align with {len(counterfactuals)} counterfactuals",
                )
        instances.append(
            EvaluationInstance(
                original=original,
                foil_label=foil,
                counterfactuals=counterfactuals,
                adversarial_original=adv_original,
                adversarial_counterfactuals=adv_counterfactuals,
            )
        )
    return tuple(instances), dim, labels


def load_instances(path: str | Path) -> tuple[tuple[EvaluationInstance, ...], int, tuple[str, ...]]:
    """Load a dataset JSONL file; returns (instances, dim, labels)."""
    content, name = _read_text(path)
    return loads_instances(content, name)


def loads_dataset(
    dataset_content: str,
    corpus_content: str,
    dataset_name: str = "dataset",
    corpus_name: str = "corpus",
) -> tuple[tuple[EvaluationInstance, ...], GroundTruthCorpus]:
    """Parse dataset and corpus strings together, checking cross-file consistency."""
    instances, dim, _labels = loads_instances(dataset_content, dataset_name)
    corpus = loads_corpus(corpus_content, corpus_name)
    if corpus.dimension != dim:
        raise DatasetError(
            f"dimension mismatch: dataset declares {dim}, corpus declares {corpus.dimension}"
        )
    return instances, corpus


def load_dataset(
    dataset_path: str | Path, corpus_path: str | Path
) -> tuple[tuple[EvaluationInstance, ...], GroundTruthCorpus]:
    """Load dataset and corpus files together, checking cross-file consistency."""
    dataset_content, dataset_name = _read_text(dataset_path)
    corpus_content, corpus_name = _read_text(corpus_path)
    return loads_dataset(dataset_content, corpus_content, dataset_name, corpus_name)


def validate_dataset(
    instances: tuple[EvaluationInstance, ...], corpus: GroundTruthCorpus
) -> ValidationReport:
    """Report structural counts and warnings; never mutates its inputs."""
    warnings = []
    foil_labels = sorted({inst.foil_label for inst in instances})
    empty = tuple(
        label for label in foil_labels if corpus.partition_size(label) == 0
    )
    for label in empty:
        warnings.append(f"empty foil class {label!r}: no ground-truth items")
    missing_adv = tuple(inst.id for inst in instances if not inst.has_adversarial)
    for iid in missing_adv:
        warnings.append(f"instance {iid!r} has no adversarial twin")
    per_instance = tuple(len(inst.counterfactuals) for inst in instances)
    return ValidationReport(
        n_instances=len(instances),
        n_counterfactuals=sum(per_instance),
        counterfactuals_per_instance=per_instance,
        n_with_adversarial=sum(1 for inst in instances if inst.has_adversarial),
        corpus_sizes={label: corpus.partition_size(label) for label in corpus.labels},
        empty_foil_labels=empty,
        instances_without_adversarial=missing_adv,
        warnings=tuple(warnings),
    )


# --- serialization -----------------------------------------------------------


def _vector_json(v: np.ndarray) -> list[float]:
    return [float(x) for x in v]


def _labeled_text_json(item: LabeledText, include_id: bool = True) -> dict:
    obj: dict = {}
    if include_id:
        obj["id"] = item.id
    obj["text"] = item.text
    obj["tokens"] = list(item.tokens)
    obj["sentence_embedding"] = _vector_json(item.sentence_embedding)
    if item.token_embeddings is not None:
        obj["token_embeddings"] = [_vector_json(v) for v in item.token_embeddings]
    return obj


def save_corpus(corpus: GroundTruthCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {"schema": SCHEMA_NAME, "dim": corpus.dimension, "labels": list(corpus.labels)}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for item in corpus.items:
            obj = _labeled_text_json(item)
            obj["label"] = item.label
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def save_dataset(
    instances: tuple[EvaluationInstance, ...],
    dim: int,
    labels: tuple[str, ...],
    path: str | Path,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {"schema": SCHEMA_NAME, "dim": dim, "labels": list(labels)}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for inst in instances:
            obj = _labeled_text_json(inst.original)
            obj["fact_label"] = inst.original.label
            obj["foil_label"] = inst.foil_label
            obj["counterfactuals"] = [
                {**_labeled_text_json(cf), "label": cf.label} for cf in inst.counterfactuals
            ]
            if inst.has_adversarial:
                adv = _labeled_text_json(inst.adversarial_original)
                adv["counterfactuals"] = [
                    {**_labeled_text_json(cf), "label": cf.label}
                    for cf in inst.adversarial_counterfactuals
                ]
                obj["adversarial"] = adv
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
