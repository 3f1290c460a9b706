"""Span-tagging head arithmetic over externally computed encoder outputs.

No encoder runs here: H and the head weights arrive via tagger.tensors.json
and every operation is plain double-precision numpy.  The paragraph gate is
a logistic head, token labels a per-token softmax, and training loss their
weighted sum.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_TAGS = (
    "O", "B-content", "I-content", "B-source", "I-source", "B-cue", "I-cue")

_CLAMP = 1e-12


class DimensionMismatch(ValueError):
    pass


class DomainError(ValueError):
    pass


def sigmoid(x: float) -> float:
    # split on sign so exp never overflows
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    z = np.exp(x)
    return float(z / (1.0 + z))


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class TaggerTensors:
    H: np.ndarray
    h_cls: np.ndarray
    w_cls: np.ndarray
    b_cls: float
    W_sp: np.ndarray
    b_sp: np.ndarray
    alpha: float = 1.0
    beta: float = 0.4
    tag_set: tuple[str, ...] = DEFAULT_TAGS

    def __post_init__(self):
        for name in ("H", "h_cls", "w_cls", "W_sp", "b_sp"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.H.ndim != 2 or 0 in self.H.shape:
            raise DimensionMismatch(f"H must be T x D, got shape {self.H.shape}")
        t, d = self.H.shape
        if self.h_cls.shape != (d,):
            raise DimensionMismatch(
                f"h_cls must have shape ({d},), got {self.h_cls.shape}")
        if self.w_cls.shape != (d,):
            raise DimensionMismatch(
                f"w_cls must have shape ({d},), got {self.w_cls.shape}")
        if self.W_sp.ndim != 2 or self.W_sp.shape[1] != d:
            raise DimensionMismatch(
                f"W_sp must be K x {d}, got shape {self.W_sp.shape}")
        k = self.W_sp.shape[0]
        if self.b_sp.shape != (k,):
            raise DimensionMismatch(
                f"b_sp must have shape ({k},), got {self.b_sp.shape}")
        if len(self.tag_set) != k:
            raise DimensionMismatch(
                f"tag_set has {len(self.tag_set)} labels for K={k}")
        if self.alpha < 0 or self.beta < 0:
            raise DomainError("alpha and beta must be non-negative")
        _check_tag_set(self.tag_set)

    @property
    def n_tokens(self) -> int:
        return self.H.shape[0]


def _check_tag_set(tag_set: tuple[str, ...]) -> None:
    if "O" not in tag_set:
        raise DimensionMismatch("tag_set must contain 'O'")
    kinds: dict[str, set[str]] = {}
    for tag in tag_set:
        if tag == "O":
            continue
        if len(tag) < 3 or tag[0] not in "BI" or tag[1] != "-":
            raise DimensionMismatch(f"malformed BIO tag {tag!r}")
        kinds.setdefault(tag[2:], set()).add(tag[0])
    for kind, prefixes in kinds.items():
        if prefixes != {"B", "I"}:
            raise DimensionMismatch(f"tag kind {kind!r} lacks a B/I pair")


def classify_paragraph(t: TaggerTensors) -> float:
    """Probability that the paragraph contains reported speech."""
    return sigmoid(float(np.dot(t.w_cls, t.h_cls)) + t.b_cls)


def token_label_probs(t: TaggerTensors) -> np.ndarray:
    """T x K matrix; row i is the label distribution for token i."""
    logits = t.H @ t.W_sp.T + t.b_sp
    return softmax_rows(logits)


def joint_loss(cls_prob: float, cls_gold: int, label_probs: np.ndarray,
               gold_labels, alpha: float, beta: float) -> float:
    """alpha * BCE(paragraph gate) + beta * mean token cross-entropy."""
    if not 0.0 <= cls_prob <= 1.0:
        raise DomainError(f"cls_prob {cls_prob} outside [0, 1]")
    if cls_gold not in (0, 1):
        raise DomainError(f"cls_gold must be 0 or 1, got {cls_gold}")
    if alpha < 0 or beta < 0:
        raise DomainError("alpha and beta must be non-negative")
    probs = np.asarray(label_probs, dtype=np.float64)
    if probs.ndim != 2:
        raise DimensionMismatch(f"label_probs must be T x K, got {probs.shape}")
    gold = np.asarray(gold_labels, dtype=np.intp)
    if gold.shape != (probs.shape[0],):
        raise DimensionMismatch(
            f"gold_labels must have length {probs.shape[0]}, got {gold.shape}")
    if probs.shape[0] and not ((0 <= gold) & (gold < probs.shape[1])).all():
        raise DomainError("gold label index out of range")

    clamped = False
    ref = cls_prob if cls_gold == 1 else 1.0 - cls_prob
    if ref < _CLAMP:
        ref, clamped = _CLAMP, True
    bce = -np.log(ref)

    if probs.shape[0]:
        picked = probs[np.arange(probs.shape[0]), gold]
        if (picked < _CLAMP).any():
            picked = np.maximum(picked, _CLAMP)
            clamped = True
        ce = float(-np.log(picked).mean())
    else:
        ce = 0.0

    if clamped:
        log.warning("joint_loss clamped zero probabilities at %g", _CLAMP)
    return float(alpha * bce + beta * ce)


def decode_bio(probs: np.ndarray,
               tag_set: tuple[str, ...] = DEFAULT_TAGS
               ) -> list[tuple[str, tuple[int, int]]]:
    """Greedy argmax decode with orphan-I repair; returns (kind, span) pairs."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != len(tag_set):
        raise DimensionMismatch(
            f"probs must be T x {len(tag_set)}, got {probs.shape}")
    labels = [tag_set[i] for i in probs.argmax(axis=1)]

    spans: list[tuple[str, tuple[int, int]]] = []
    cur_kind: str | None = None
    cur_start = 0
    for i, label in enumerate(labels):
        if label == "O":
            prefix, kind = "O", None
        else:
            prefix, kind = label[0], label[2:]
        if prefix == "I" and kind != cur_kind:
            prefix = "B"  # orphan continuation: treat as a span start
        if prefix != "I" and cur_kind is not None:
            spans.append((cur_kind, (cur_start, i)))
            cur_kind = None
        if prefix == "B":
            cur_kind, cur_start = kind, i
    if cur_kind is not None:
        spans.append((cur_kind, (cur_start, len(labels))))
    return spans


def load_tagger_tensors(path: str | Path) -> TaggerTensors:
    with Path(path).open(encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        return TaggerTensors(
            H=raw["H"],
            h_cls=raw["h_cls"],
            w_cls=raw["w_cls"],
            b_cls=float(raw["b_cls"]),
            W_sp=raw["W_sp"],
            b_sp=raw["b_sp"],
            alpha=float(raw.get("alpha", 1.0)),
            beta=float(raw.get("beta", 0.4)),
            tag_set=tuple(raw.get("tags", DEFAULT_TAGS)),
        )
    except KeyError as exc:
        raise DimensionMismatch(f"tensor file {path} missing field {exc}")


def save_tagger_tensors(t: TaggerTensors, path: str | Path) -> None:
    payload = {
        "H": t.H.tolist(),
        "h_cls": t.h_cls.tolist(),
        "w_cls": t.w_cls.tolist(),
        "b_cls": t.b_cls,
        "W_sp": t.W_sp.tolist(),
        "b_sp": t.b_sp.tolist(),
        "alpha": t.alpha,
        "beta": t.beta,
        "tags": list(t.tag_set),
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
