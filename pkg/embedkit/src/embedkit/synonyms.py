"""Small built-in synonym lexicon for semantic-similarity perturbations.

Substitution candidates come from closed synonym groups; a token matches a
group case-insensitively and the replacement inherits the original's initial
capitalization. The lexicon is intentionally compact: the attack contract is
"minimally edited, semantically close", not linguistic coverage, and callers
can layer their own lexicon on top.
"""

from __future__ import annotations

GROUPS: tuple[tuple[str, ...], ...] = (
    ("food", "meal", "fare"),
    ("good", "great", "fine"),
    ("bad", "awful", "poor"),
    ("fast", "quick", "speedy"),
    ("slow", "sluggish", "unhurried"),
    ("warm", "hot"),
    ("cold", "chilly", "cool"),
    ("service", "staff", "crew"),
    ("place", "spot", "venue"),
    ("tasty", "delicious", "flavorful"),
    ("bland", "plain", "dull"),
    ("noisy", "loud"),
    ("quiet", "calm", "peaceful"),
    ("big", "large", "huge"),
    ("small", "little", "tiny"),
    ("happy", "glad", "pleased"),
    ("sad", "unhappy", "gloomy"),
    ("clean", "tidy", "spotless"),
    ("dirty", "messy", "grimy"),
    ("price", "cost"),
    ("cheap", "affordable"),
    ("expensive", "pricey", "costly"),
    ("movie", "film", "picture"),
    ("book", "novel"),
    ("start", "begin"),
    ("end", "finish", "close"),
)

_BY_WORD: dict[str, tuple[str, ...]] = {}
for _group in GROUPS:
    for _word in _group:
        _BY_WORD[_word] = tuple(w for w in _group if w != _word)


def synonyms(token: str) -> tuple[str, ...]:
    """Alternatives for a token, preserving initial capitalization; empty
    when the token is not in the lexicon."""
    alternatives = _BY_WORD.get(token.lower(), ())
    if not alternatives:
        return ()
    if token[:1].isupper():
        return tuple(w.capitalize() for w in alternatives)
    return alternatives
