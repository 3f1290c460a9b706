"""Non-neural evaluation suite: ROUGE variants, span and speaker scoring,
abstractiveness (MINT, novel n-grams), and heuristic entity precision.

Every scorer is a pure function; evaluate_examples fans out across a thread
pool but merges results keyed by example id in sorted order, so reports are
byte-identical at any parallelism level.
"""

import json
import logging
import math
import re
import string
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .corpus import novel_ngram_pct
from .segmenting import segment_sentences
from .stemming import porter_stem
from .tokens import ngrams, tokenize

if TYPE_CHECKING:
    from .corpus import Corpus

log = logging.getLogger(__name__)

ROUGE_KEYS = ("rouge1", "rouge2", "rougeL")
NOVELTY_ORDERS = (1, 2, 3, 4)


class EmptySummary(ValueError):
    pass


@dataclass(frozen=True)
class PrfScore:
    precision: float
    recall: float
    f1: float

    def __post_init__(self):
        for v in (self.precision, self.recall, self.f1):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"score {v} outside [0, 1]")
        expected = _f1(self.precision, self.recall)
        if abs(expected - self.f1) > 1e-9:
            raise ValueError(
                f"inconsistent f1 {self.f1} for P={self.precision}, "
                f"R={self.recall}")

    def as_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall,
                "f1": self.f1}


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _prf(p: float, r: float) -> PrfScore:
    return PrfScore(p, r, _f1(p, r))


def _prep(text: str, stemming: bool) -> list[str]:
    toks = tokenize(text)
    if stemming:
        toks = [porter_stem(t) for t in toks]
    return toks


def rouge_n(candidate: str, reference: str, n: int,
            stemming: bool = False) -> PrfScore:
    """Clipped n-gram overlap precision/recall/F1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    c = ngrams(_prep(candidate, stemming), n)
    r = ngrams(_prep(reference, stemming), n)
    if not c and not r:
        log.debug("rouge_%d on two empty n-gram sets; scoring 1 by convention", n)
        return _prf(1.0, 1.0)
    if not c or not r:
        return _prf(0.0, 0.0)
    matches = sum((Counter(c) & Counter(r)).values())
    return _prf(matches / len(c), matches / len(r))


def _lcs_len(a: Sequence, b: Sequence) -> int:
    # single-row DP
    if not a or not b:
        return 0
    row = [0] * (len(b) + 1)
    for x in a:
        prev = 0
        for j, y in enumerate(b, start=1):
            cur = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = cur
    return row[-1]


def rouge_l(candidate: str, reference: str, stemming: bool = False) -> PrfScore:
    c = _prep(candidate, stemming)
    r = _prep(reference, stemming)
    if not c and not r:
        log.debug("rouge_l on two empty token lists; scoring 1 by convention")
        return _prf(1.0, 1.0)
    if not c or not r:
        return _prf(0.0, 0.0)
    lcs = _lcs_len(c, r)
    return _prf(lcs / len(c), lcs / len(r))


def rouge_multi(candidate: str, references: Sequence[str],
                stemming: bool = False) -> dict[str, PrfScore]:
    """Per metric, the whole P/R/F triple of the best-F1 reference."""
    if not references:
        raise ValueError("references must be non-empty")
    out: dict[str, PrfScore] = {}
    scorers = {
        "rouge1": lambda c, r: rouge_n(c, r, 1, stemming),
        "rouge2": lambda c, r: rouge_n(c, r, 2, stemming),
        "rougeL": lambda c, r: rouge_l(c, r, stemming),
    }
    for key, scorer in scorers.items():
        best = None
        for ref in references:
            score = scorer(candidate, ref)
            if best is None or score.f1 > best.f1:  # ties keep the first ref
                best = score
        out[key] = best
    return out


def mint(summary: str, sources: Sequence[str]) -> float:
    """Abstractiveness in [0, 100]: 100 x (1 - geometric mean of n-gram
    precisions p1..p4 and the LCS ratio against the source concatenation).

    A zero factor is smoothed to 1/(2 * candidate-ngram-count); orders where
    the summary is too short to have any n-grams drop out of the mean.
    """
    s_tok = tokenize(summary)
    if not s_tok:
        raise EmptySummary("summary has no tokens")
    src_tok = tokenize(" ".join(sources))

    factors: list[float] = []
    src_counts_cache: dict[int, Counter] = {}
    for n in (1, 2, 3, 4):
        cand = ngrams(s_tok, n)
        if not cand:
            log.debug("mint: no %d-grams in summary; order dropped", n)
            continue
        src_counts = src_counts_cache.setdefault(n, Counter(ngrams(src_tok, n)))
        matches = sum((Counter(cand) & src_counts).values())
        p = matches / len(cand)
        factors.append(p if p > 0 else 1.0 / (2 * len(cand)))

    lcs_ratio = _lcs_len(s_tok, src_tok) / len(s_tok)
    factors.append(lcs_ratio if lcs_ratio > 0 else 1.0 / (2 * len(s_tok)))

    geo = math.exp(sum(math.log(f) for f in factors) / len(factors))
    return 100.0 * (1.0 - geo)


_ENTITY_STOP = {
    "the", "a", "an", "he", "she", "it", "they", "we", "i", "you", "his",
    "her", "its", "their", "our", "this", "that", "these", "those", "there",
    "here", "when", "while", "after", "before", "but", "and", "or", "in",
    "on", "at", "for", "with", "from", "to", "as", "is", "are", "was",
    "were", "within", "however", "meanwhile", "finally", "also", "then",
    "now", "today", "yesterday", "according", "if", "so", "one", "two",
    "some", "no", "not", "all", "many", "most", "more", "what", "who",
    "how", "why", "where", "since", "during", "despite", "although",
    "once", "still", "even", "by", "of", "over", "under", "between",
}

_WORD_CASED = re.compile(r"[^\W_]+")


def extract_entities(text: str) -> list[str]:
    """Maximal capitalized-token runs, minus lone sentence-initial stopwords."""
    sentence_starts = set()
    for s, e in segment_sentences(text):
        m = _WORD_CASED.search(text, s, e)
        if m:
            sentence_starts.add(m.start())

    entities: list[str] = []
    run: list[re.Match] = []

    def flush():
        toks = run
        # a capitalized sentence opener like "The" or "In" is casing, not
        # naming; drop it from the front of the run
        if (toks
                and toks[0].start() in sentence_starts
                and toks[0].group().casefold() in _ENTITY_STOP):
            toks = toks[1:]
        if toks:
            entities.append(" ".join(m.group() for m in toks))

    prev_end = None
    for m in _WORD_CASED.finditer(text):
        tok = m.group()
        joinable = (prev_end is not None and m.start() - prev_end <= 1
                    and text[prev_end:m.start()].isspace())
        if tok[:1].isupper():
            if not joinable:
                flush()
                run = []
            run.append(m)
        else:
            flush()
            run = []
        prev_end = m.end()
    flush()
    return entities


def entity_precision(summary: str, gold_statements: Sequence[str]) -> float:
    """Percent of summary entities that occur in the gold statement texts."""
    entities = extract_entities(summary)
    if not entities:
        log.debug("no entities in summary; precision 100 by convention")
        return 100.0
    gold_entities = {
        ent.casefold()
        for text in gold_statements for ent in extract_entities(text)}
    gold_raw = " ".join(gold_statements).casefold()
    hits = sum(
        1 for ent in entities
        if ent.casefold() in gold_entities or ent.casefold() in gold_raw)
    return 100.0 * hits / len(entities)


def span_prf(pred_spans: Iterable[tuple[int, int]],
             gold_spans: Iterable[tuple[int, int]]) -> PrfScore:
    pred = set()
    for s, e in pred_spans:
        pred.update(range(s, e))
    gold = set()
    for s, e in gold_spans:
        gold.update(range(s, e))
    if not pred and not gold:
        return _prf(1.0, 1.0)
    if not pred or not gold:
        return _prf(0.0, 0.0)
    inter = len(pred & gold)
    return _prf(inter / len(pred), inter / len(gold))


_ARTICLES = {"a", "an", "the"}


def _norm_answer(text: str) -> list[str]:
    text = text.lower()
    text = "".join(" " if ch in string.punctuation else ch for ch in text)
    return [t for t in text.split() if t not in _ARTICLES]


def speaker_em_f1(pred: str, gold: str) -> tuple[int, float]:
    p = _norm_answer(pred)
    g = _norm_answer(gold)
    em = int(p == g)
    if not p or not g:
        return em, float(em)
    common = sum((Counter(p) & Counter(g)).values())
    if common == 0:
        return em, 0.0
    precision = common / len(p)
    recall = common / len(g)
    return em, 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalOptions:
    metrics: tuple[str, ...] = ("rouge", "novelty", "mint", "entity")
    stemming: bool = False
    jobs: int = 1


@dataclass(frozen=True)
class MetricReport:
    n_examples: int
    n_scored: int
    missing: tuple[str, ...]
    per_example: dict[str, dict] = field(compare=False)
    aggregate: dict[str, float] = field(compare=False)
    flags: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "n_scored": self.n_scored,
            "missing": list(self.missing),
            "per_example": self.per_example,
            "aggregate": self.aggregate,
            "flags": list(self.flags),
            "note": "entity extraction is capitalization-heuristic, not NER",
        }


def _flatten(scores: dict) -> dict[str, float]:
    flat: dict[str, float] = {}
    for key, val in scores.items():
        if isinstance(val, dict):
            for sub, num in val.items():
                flat[f"{key}_{sub}"] = num
        elif val is not None:
            flat[key] = val
    return flat


def _score_example(prediction: str, references: Sequence[str],
                   sources: Sequence[str] | None,
                   options: EvalOptions) -> tuple[dict, list[str]]:
    scores: dict = {}
    flags: list[str] = []
    if "rouge" in options.metrics:
        multi = rouge_multi(prediction, references, stemming=options.stemming)
        for key, prf in multi.items():
            scores[key] = prf.as_dict()
    if sources is not None:
        if "novelty" in options.metrics:
            scores["novelty"] = {
                str(n): novel_ngram_pct(prediction, list(sources), n)
                for n in NOVELTY_ORDERS}
        if "mint" in options.metrics:
            try:
                scores["mint"] = mint(prediction, sources)
            except EmptySummary:
                flags.append("empty prediction: mint skipped")
        if "entity" in options.metrics:
            scores["entity_precision"] = entity_precision(prediction, sources)
    return scores, flags


def statement_texts(corpus: "Corpus", statement_ids: Sequence[str]) -> list[str]:
    out = []
    for st_id in statement_ids:
        st = corpus.statements_by_id.get(st_id)
        if st is None:
            continue
        art = corpus.articles_by_id.get(st.article_id)
        if art is not None:
            out.append(st.text(art))
    return out


def evaluate_examples(predictions: Mapping[str, str], corpus: "Corpus",
                      options: EvalOptions = EvalOptions()) -> MetricReport:
    """Score predictions against each example's references (and statements)."""
    missing: list[str] = []
    work: list[tuple[str, str, list[str], list[str] | None]] = []
    have_statements = bool(corpus.statements)
    for ex in corpus.examples:
        if ex.example_id not in predictions:
            missing.append(ex.example_id)
            continue
        sources = (statement_texts(corpus, ex.statement_ids)
                   if have_statements else None)
        work.append((ex.example_id, predictions[ex.example_id],
                     list(ex.references), sources))
    if missing:
        log.warning("missing predictions for %d example(s)", len(missing))
    if not have_statements:
        log.info("corpus has no gold statements: novelty/mint/entity skipped")

    def job(item):
        ex_id, pred, refs, sources = item
        return ex_id, _score_example(pred, refs, sources, options)

    if options.jobs > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            results = dict(pool.map(job, work))
    else:
        results = dict(map(job, work))

    per_example: dict[str, dict] = {}
    flags: list[str] = []
    sums: dict[str, float] = {}
    for ex_id in sorted(results):
        scores, ex_flags = results[ex_id]
        per_example[ex_id] = scores
        flags.extend(f"{ex_id}: {f}" for f in ex_flags)
        for key, val in _flatten(scores).items():
            sums[key] = sums.get(key, 0.0) + val

    n_scored = len(per_example)
    aggregate = {k: v / n_scored for k, v in sorted(sums.items())} if n_scored \
        else {}
    return MetricReport(
        n_examples=len(corpus.examples),
        n_scored=n_scored,
        missing=tuple(sorted(missing)),
        per_example=per_example,
        aggregate=aggregate,
        flags=tuple(flags),
    )


def read_predictions(path: str | Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out[obj["example_id"]] = obj["summary"]
    return out


_TSV_COLUMNS = (
    "rouge1_precision", "rouge1_recall", "rouge1_f1",
    "rouge2_precision", "rouge2_recall", "rouge2_f1",
    "rougeL_precision", "rougeL_recall", "rougeL_f1",
    "novelty_1", "novelty_2", "novelty_3", "novelty_4",
    "mint", "entity_precision",
)


def write_report(report: MetricReport, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "report.json").open("w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, ensure_ascii=False, sort_keys=True,
                  indent=2)
        fh.write("\n")

    def fmt(flat: dict[str, float]) -> list[str]:
        return ["%.6f" % flat[c] if c in flat else "" for c in _TSV_COLUMNS]

    with (out / "report.tsv").open("w", encoding="utf-8") as fh:
        fh.write("\t".join(("example_id",) + _TSV_COLUMNS) + "\n")
        for ex_id, scores in sorted(report.per_example.items()):
            fh.write("\t".join([ex_id] + fmt(_flatten(scores))) + "\n")
        fh.write("\t".join(["AGGREGATE"] + fmt(report.aggregate)) + "\n")
