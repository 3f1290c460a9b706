"""Shared word tokenizer used by the overlap metrics and novelty statistics."""

import re

_WORD = re.compile(r"[^\W_]+")  # maximal runs of Unicode letters/digits


def tokenize(text: str) -> list[str]:
    """Lowercase and split into letter/digit runs; everything else separates."""
    return _WORD.findall(text.lower())


def ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]
