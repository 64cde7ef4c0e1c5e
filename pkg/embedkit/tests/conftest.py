from __future__ import annotations

import json
from pathlib import Path

import pytest

# Ten-plus-token review sentences with several lexicon words each; one-token
# substitutions on texts this long keep cosine similarity comfortably high.
REVIEW_TEXTS = [
    "the food at this small place was cold and bland last night",
    "our service felt slow but the staff stayed happy and quite friendly",
    "a warm meal in a quiet spot makes the whole evening good",
    "the noisy room and dirty tables made the expensive dinner feel bad",
    "that cheap pasta was tasty and the portions were big and fresh",
    "the movie we watched after dinner was sad but the book was good",
    "a clean venue with fast service and tasty dessert is hard to find",
    "the price was fair although the cold soup arrived slow and plain",
    "we had a good time since the place was calm and spotless",
    "the big menu had tasty food but the crew seemed unhappy tonight",
]


@pytest.fixture()
def texts_file(tmp_path) -> Path:
    path = tmp_path / "texts.txt"
    path.write_text("\n".join(REVIEW_TEXTS) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def corpus_input(tmp_path) -> Path:
    """Corpus-shaped JSONL: labeled raw texts, both classes."""
    records = []
    for i, text in enumerate(REVIEW_TEXTS):
        records.append(
            {"id": f"gt{i:03d}", "text": text, "label": "positive" if i % 2 else "negative"}
        )
    path = tmp_path / "corpus_raw.jsonl"
    path.write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )
    return path


@pytest.fixture()
def dataset_input(tmp_path) -> Path:
    """Dataset-shaped JSONL with counterfactuals and adversarial twins."""
    records = []
    for i in range(6):
        fact = "negative" if i % 2 == 0 else "positive"
        foil = "positive" if fact == "negative" else "negative"
        text = REVIEW_TEXTS[i]
        swapped = text.replace("the", "that", 1)
        records.append(
            {
                "id": f"inst{i:03d}",
                "text": text,
                "fact_label": fact,
                "foil_label": foil,
                "counterfactuals": [
                    {"text": REVIEW_TEXTS[(i + 3) % len(REVIEW_TEXTS)]},
                    {"text": REVIEW_TEXTS[(i + 5) % len(REVIEW_TEXTS)]},
                ],
                "adversarial": {
                    "text": swapped,
                    "counterfactuals": [
                        {"text": REVIEW_TEXTS[(i + 3) % len(REVIEW_TEXTS)].replace("the", "that", 1)},
                        {"text": REVIEW_TEXTS[(i + 5) % len(REVIEW_TEXTS)].replace("the", "that", 1)},
                    ],
                },
            }
        )
    path = tmp_path / "dataset_raw.jsonl"
    path.write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )
    return path
