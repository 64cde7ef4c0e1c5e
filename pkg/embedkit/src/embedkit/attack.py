"""Semantic-similarity adversarial twins via constrained synonym substitution.

For each input text, every lexicon-covered token position is tried with every
synonym; a candidate survives when the cosine similarity between the original
and perturbed sentence embeddings stays at or above the floor. The surviving
candidate with the highest similarity wins (ties: leftmost position, then
alphabetical replacement), so the attack is deterministic without any RNG.
Texts with no surviving candidate are recorded as skipped with a reason,
never dropped silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .jobs import read_input_records
from .models import DEFAULT_MAX_TOKENS, EmbedError, cosine_similarity, load_model
from .synonyms import synonyms

ATTACK_SCHEMA = "embedkit/attack/v1"


@dataclass(frozen=True)
class AdversarialPair:
    original_id: str
    adversarial_text: str
    similarity: float


@dataclass
class AttackResult:
    floor: float
    model: str
    pairs: list[AdversarialPair] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (id, reason)

    @property
    def skip_rate(self) -> float:
        total = len(self.pairs) + len(self.skipped)
        return len(self.skipped) / total if total else 0.0


def perturb_text(text: str, floor: float, model) -> tuple[str, float] | str:
    """Best surviving perturbation of one text, or a skip reason string."""
    tokens = text.split()
    if not tokens:
        return "text has no tokens"
    base = model.encode(text).sentence_embedding
    survivors: list[tuple[float, int, str, str]] = []
    substitutable = 0
    for position, token in enumerate(tokens):
        for replacement in synonyms(token):
            substitutable += 1
            candidate_tokens = list(tokens)
            candidate_tokens[position] = replacement
            candidate = " ".join(candidate_tokens)
            similarity = cosine_similarity(
                base, model.encode(candidate).sentence_embedding
            )
            if similarity >= floor:
                survivors.append((-similarity, position, replacement, candidate))
    if substitutable == 0:
        return "no token has a lexicon synonym"
    if not survivors:
        return f"no substitution met the similarity floor {floor}"
    # Highest similarity first; ties go to the leftmost position, then the
    # alphabetically first replacement. Deterministic without any RNG.
    neg_similarity, _, _, candidate = min(survivors)
    return candidate, -neg_similarity


def perturb_texts(
    input_path: str | Path,
    similarity_floor: float,
    model_id: str = "hash-32",
    max_tokens: int = DEFAULT_MAX_TOKENS,
) -> AttackResult:
    """Perturb every record of a plain or JSONL input file."""
    if not 0.0 < similarity_floor < 1.0:
        raise EmbedError(f"similarity floor must be in (0, 1), got {similarity_floor}")
    model = load_model(model_id, max_tokens=max_tokens)
    records = read_input_records(input_path, default_label="unlabeled")
    result = AttackResult(floor=similarity_floor, model=model.name)
    for i, obj in enumerate(records):
        record_id = str(obj.get("id") or f"t{i:05d}")
        text = obj.get("text")
        if not isinstance(text, str) or not text.strip():
            result.skipped.append((record_id, "record has no text"))
            continue
        outcome = perturb_text(text, similarity_floor, model)
        if isinstance(outcome, str):
            result.skipped.append((record_id, outcome))
        else:
            adversarial_text, similarity = outcome
            result.pairs.append(
                AdversarialPair(record_id, adversarial_text, similarity)
            )
    return result


def write_attack_file(result: AttackResult, path: str | Path) -> None:
    header = {"schema": ATTACK_SCHEMA, "model": result.model, "floor": result.floor}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for pair in result.pairs:
            fh.write(
                json.dumps(
                    {
                        "original_id": pair.original_id,
                        "adversarial_text": pair.adversarial_text,
                        "similarity": pair.similarity,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
        for record_id, reason in result.skipped:
            fh.write(
                json.dumps(
                    {"original_id": record_id, "skipped": reason}, sort_keys=True
                )
                + "\n"
            )
