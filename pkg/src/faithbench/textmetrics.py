"""Baseline text-generation metrics: BLEU, Self-BLEU, and an embedding-based
token-matching score.

BLEU here is the sentence-level variant: geometric mean of clipped n-gram
precisions with additive smoothing, times the usual brevity penalty against
the closest reference length. Self-BLEU averages each sequence's BLEU
against its siblings and measures (lack of) diversity. The embedding score
greedily matches each token to its most similar counterpart by cosine
similarity, yielding precision/recall/F1 without idf weighting.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from collections.abc import Sequence

import numpy as np

from .geometry import cosine_distance


@dataclass(frozen=True)
class NGramProfile:
    """n-gram counts of a token sequence for orders 1..max_n."""

    counts: dict[int, Counter]
    length: int

    @classmethod
    def of(cls, tokens: Sequence[str], max_n: int) -> "NGramProfile":
        tokens = tuple(tokens)
        counts = {
            n: Counter(tokens[i : i + n] for i in range(len(tokens) - n + 1))
            for n in range(1, max_n + 1)
        }
        return cls(counts=counts, length=len(tokens))


def bleu(
    candidate: Sequence[str],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
    smoothing: float = 1e-9,
) -> float:
    """Sentence BLEU of a candidate against one or more references, in [0, 1].

    Per order n, the clipped precision is (matches + eps) / (total + eps);
    the brevity penalty is exp(min(0, 1 - r/c)) with r the reference length
    closest to the candidate length c (ties to the shorter reference).
    """
    candidate = tuple(candidate)
    if not candidate:
        raise ValueError("empty candidate")
    references = [tuple(r) for r in references]
    if not references:
        raise ValueError("at least one reference required")
    cand = NGramProfile.of(candidate, max_n)
    refs = [NGramProfile.of(r, max_n) for r in references]

    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = cand.counts[n]
        total = sum(cand_counts.values())
        matches = 0
        for gram, count in cand_counts.items():
            best = max((r.counts[n].get(gram, 0) for r in refs), default=0)
            matches += min(count, best)
        log_sum += math.log((matches + smoothing) / (total + smoothing))
    geo_mean = math.exp(log_sum / max_n)

    c = cand.length
    r = min((abs(ref.length - c), ref.length) for ref in refs)[1]
    brevity = math.exp(min(0.0, 1.0 - r / c))
    return brevity * geo_mean


def self_bleu(counterfactuals: Sequence[Sequence[str]], max_n: int = 4,
              smoothing: float = 1e-9) -> float:
    """Mean BLEU of each sequence against all its siblings; lower = more diverse."""
    seqs = [tuple(s) for s in counterfactuals]
    if len(seqs) < 2:
        raise ValueError("self_bleu needs at least 2 sequences")
    scores = [
        bleu(seq, seqs[:i] + seqs[i + 1 :], max_n=max_n, smoothing=smoothing)
        for i, seq in enumerate(seqs)
    ]
    return float(np.mean(scores))


def self_bert(
    candidate_embeddings: Sequence[np.ndarray],
    reference_embeddings: Sequence[np.ndarray],
) -> tuple[float, float, float]:
    """Greedy cosine matching over token embeddings: (precision, recall, f1).

    Precision is the mean, over candidate tokens, of the best similarity to
    any reference token; recall is the symmetric direction; f1 their
    harmonic mean (0 when precision + recall is not positive). No idf
    weighting or rescaling is applied.
    """
    if not len(candidate_embeddings) or not len(reference_embeddings):
        raise ValueError("both token-embedding sequences must be nonempty")
    sim = np.empty((len(candidate_embeddings), len(reference_embeddings)))
    for i, c_vec in enumerate(candidate_embeddings):
        for j, r_vec in enumerate(reference_embeddings):
            sim[i, j] = 1.0 - cosine_distance(c_vec, r_vec)
    precision = float(np.mean(sim.max(axis=1)))
    recall = float(np.mean(sim.max(axis=0)))
    if precision + recall <= 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1
