"""Embedding providers.

Two providers sit behind one interface:

* ``hash-<dim>`` — a deterministic stand-in language model. Every token gets
  a unit gaussian vector seeded from the SHA-256 of the token string, and the
  sentence vector is the mean of the token states. No weights, no network,
  bit-identical across runs and platforms; the default for desk-scale work
  and for tests.
* any other identifier — loaded with ``transformers`` (mean pooling over the
  final hidden states). Import and weight loading happen lazily; any failure
  surfaces as :class:`EmbedError` ("model load failure").

Texts longer than the model's context are truncated, and the truncation is
reported to the caller as a warning, never silently.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_TOKENS = 512

_HASH_MODEL = re.compile(r"^hash-(\d+)$")


class EmbedError(Exception):
    """Model loading or encoding failed."""


@dataclass(frozen=True)
class EncodedText:
    tokens: tuple[str, ...]
    token_embeddings: tuple[np.ndarray, ...]
    sentence_embedding: np.ndarray
    truncated: bool


def cosine_similarity(u, v) -> float:
    """Cosine similarity; exactly 1.0 for identical inputs."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.sqrt((u * u).sum()))
    nv = float(np.sqrt((v * v).sum()))
    if nu == 0.0 or nv == 0.0:
        raise EmbedError("zero-norm vector: cosine similarity undefined")
    diff = u / nu - v / nv
    return 1.0 - min(0.5 * float((diff * diff).sum()), 2.0)


class HashEmbedder:
    """Deterministic hash-seeded token vectors with mean pooling."""

    def __init__(self, dimension: int, max_tokens: int = DEFAULT_MAX_TOKENS):
        if dimension < 2:
            raise EmbedError(f"hash model dimension must be >= 2, got {dimension}")
        self.name = f"hash-{dimension}"
        self.dimension = dimension
        self.max_tokens = max_tokens
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._token_cache.get(token)
        if cached is not None:
            return cached
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
        vec = rng.normal(size=self.dimension)
        norm = float(np.sqrt((vec * vec).sum()))
        if norm == 0.0:  # astronomically unlikely; keep the contract anyway
            vec = np.ones(self.dimension)
            norm = float(np.sqrt(self.dimension))
        vec = vec / norm
        self._token_cache[token] = vec
        return vec

    def encode(self, text: str) -> EncodedText:
        tokens = tuple(text.split())
        if not tokens:
            raise EmbedError(f"cannot embed text without tokens: {text!r}")
        truncated = len(tokens) > self.max_tokens
        if truncated:
            tokens = tokens[: self.max_tokens]
        vectors = tuple(self._token_vector(t) for t in tokens)
        sentence = np.mean(vectors, axis=0)
        if float(np.sqrt((sentence * sentence).sum())) == 0.0:
            raise EmbedError(f"degenerate pooled embedding for text {text!r}")
        return EncodedText(
            tokens=tokens,
            token_embeddings=vectors,
            sentence_embedding=sentence,
            truncated=truncated,
        )


def _load_transformers_backend(model_id: str):
    """Import transformers lazily and load tokenizer + model weights."""
    from transformers import AutoModel, AutoTokenizer  # deferred heavy import
    import torch

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    model = AutoModel.from_pretrained(model_id)
    model.eval()
    return tokenizer, model, torch


class TransformersEmbedder:
    """Mean pooling over the final hidden states of a transformers model."""

    def __init__(self, model_id: str, max_tokens: int = DEFAULT_MAX_TOKENS):
        try:
            self._tokenizer, self._model, self._torch = _load_transformers_backend(model_id)
        except Exception as exc:
            raise EmbedError(f"model load failure for {model_id!r}: {exc}") from exc
        self.name = model_id
        self.dimension = int(self._model.config.hidden_size)
        self.max_tokens = max_tokens

    def encode(self, text: str) -> EncodedText:
        if not text.strip():
            raise EmbedError(f"cannot embed text without tokens: {text!r}")
        full = self._tokenizer(text, return_tensors="pt", truncation=False)
        n_full = int(full["input_ids"].shape[1])
        encoding = self._tokenizer(
            text, return_tensors="pt", truncation=True, max_length=self.max_tokens
        )
        with self._torch.no_grad():
            hidden = self._model(**encoding).last_hidden_state[0]
        states = hidden.double().numpy()
        tokens = tuple(
            self._tokenizer.convert_ids_to_tokens(encoding["input_ids"][0])
        )
        return EncodedText(
            tokens=tokens,
            token_embeddings=tuple(states[i] for i in range(states.shape[0])),
            sentence_embedding=states.mean(axis=0),
            truncated=n_full > self.max_tokens,
        )


def load_model(model_id: str, max_tokens: int = DEFAULT_MAX_TOKENS):
    """Resolve a model identifier to a provider instance."""
    match = _HASH_MODEL.match(model_id)
    if match:
        return HashEmbedder(int(match.group(1)), max_tokens=max_tokens)
    return TransformersEmbedder(model_id, max_tokens=max_tokens)
