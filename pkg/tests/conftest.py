from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from faithbench.corpus import EvaluationInstance, LabeledText

TESTS_DIR = Path(__file__).parent
MINI_DIR = TESTS_DIR / "data" / "mini"


def make_text(
    id_: str,
    vec,
    label: str = "positive",
    text: str | None = None,
    tokens: tuple[str, ...] | None = None,
    token_embeddings=None,
) -> LabeledText:
    if text is None:
        text = f"text {id_}"
    if tokens is None:
        tokens = tuple(text.split())
    return LabeledText(
        id=id_,
        text=text,
        tokens=tokens,
        label=label,
        sentence_embedding=np.asarray(vec, dtype=np.float64),
        token_embeddings=(
            tuple(np.asarray(v, dtype=np.float64) for v in token_embeddings)
            if token_embeddings is not None
            else None
        ),
    )


def make_instance(
    id_: str,
    original_vec,
    cf_vecs,
    fact: str = "negative",
    foil: str = "positive",
    adv_vec=None,
    adv_cf_vecs=None,
) -> EvaluationInstance:
    original = make_text(id_, original_vec, label=fact)
    cfs = tuple(
        make_text(f"{id_}#cf{i}", vec, label=foil) for i, vec in enumerate(cf_vecs)
    )
    adv = adv_cfs = None
    if adv_vec is not None:
        adv = make_text(f"{id_}#adv", adv_vec, label=fact)
        adv_cfs = tuple(
            make_text(f"{id_}#adv-cf{i}", vec, label=foil)
            for i, vec in enumerate(adv_cf_vecs)
        )
    return EvaluationInstance(
        original=original,
        foil_label=foil,
        counterfactuals=cfs,
        adversarial_original=adv,
        adversarial_counterfactuals=adv_cfs,
    )


def angle_vec(theta: float) -> np.ndarray:
    """Unit vector in the plane; cosine distance to angle 0 is 1 - cos(theta)."""
    return np.array([math.cos(theta), math.sin(theta)])


@pytest.fixture(scope="session")
def mini_paths() -> dict[str, Path]:
    """Paths of the bundled synthetic mini-dataset (generated by
    make_mini_dataset.py and committed)."""
    paths = {
        "dataset": MINI_DIR / "dataset.jsonl",
        "corpus": MINI_DIR / "corpus.jsonl",
        "manifest": MINI_DIR / "manifest.json",
        "config": MINI_DIR / "config.yaml",
        "golden": MINI_DIR / "golden_digests.json",
    }
    missing = [str(p) for p in paths.values() if not p.exists()]
    if missing:
        pytest.fail(
            "mini-dataset fixture missing; run tests/make_mini_dataset.py "
            f"(missing: {', '.join(missing)})"
        )
    return paths
