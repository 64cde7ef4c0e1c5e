"""Offline sidecar for the faithfulness evaluation engine.

Produces the JSONL interchange files the engine consumes: sentence and token
embeddings for corpora and datasets (``embed``), and semantically close
adversarial twins via embedding-constrained synonym substitution
(``attack``).
"""

__version__ = "0.1.0"

from .attack import AttackResult, perturb_text, perturb_texts, write_attack_file  # noqa: F401
from .jobs import EmbedJob, EmbedResult, embed_texts  # noqa: F401
from .models import (  # noqa: F401
    EmbedError,
    EncodedText,
    HashEmbedder,
    cosine_similarity,
    load_model,
)
from .synonyms import synonyms  # noqa: F401
