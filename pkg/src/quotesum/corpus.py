"""Data model and JSONL ingestion for event-clustered news corpora.

A corpus directory holds three required files (articles.jsonl, events.jsonl,
examples.jsonl) and optionally statements.jsonl with gold reported-speech
annotations.  Loading validates cross-references eagerly so downstream code
can index without guards.
"""

from __future__ import annotations

import json
import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable

from .segmenting import segment_sentences
from .tokens import ngrams, tokenize

if TYPE_CHECKING:
    from .attribution import ReportedStatement

log = logging.getLogger(__name__)

Interval = tuple[int, int]

_SPLITS = ("train", "dev", "test")


class CorpusError(ValueError):
    """Base class for corpus validation failures."""


class MalformedLine(CorpusError):
    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


class DuplicateId(CorpusError):
    def __init__(self, path: str, line_no: int, dup_id: str):
        super().__init__(f"{path}:{line_no}: duplicate id {dup_id!r}")
        self.path = path
        self.line_no = line_no
        self.dup_id = dup_id


class DanglingReference(CorpusError):
    def __init__(self, kind: str, ref_id: str, owner: str):
        super().__init__(f"{owner} references unknown {kind} {ref_id!r}")
        self.kind = kind
        self.ref_id = ref_id
        self.owner = owner


@dataclass(frozen=True)
class Article:
    id: str
    event_id: str
    text: str
    sentences: tuple[Interval, ...]
    url: str | None = None
    published: str | None = None


@dataclass(frozen=True)
class EventCluster:
    event_id: str
    name: str
    article_ids: tuple[str, ...]


@dataclass(frozen=True)
class SummaryExample:
    example_id: str
    event_id: str
    speaker: str
    statement_ids: tuple[str, ...]
    references: tuple[str, ...]
    split: str


@dataclass(frozen=True)
class CorpusStats:
    n_examples: int
    n_train: int
    n_dev: int
    n_test: int
    n_articles: int
    n_events: int
    n_statements: int
    n_speakers: int
    avg_summary_words: float
    avg_statements_per_summary: float
    source_article_histogram: dict[int, float] = field(compare=False)

    def as_dict(self) -> dict[str, Any]:
        return {
            "n_examples": self.n_examples,
            "n_train": self.n_train,
            "n_dev": self.n_dev,
            "n_test": self.n_test,
            "n_articles": self.n_articles,
            "n_events": self.n_events,
            "n_statements": self.n_statements,
            "n_speakers": self.n_speakers,
            "avg_summary_words": self.avg_summary_words,
            "avg_statements_per_summary": self.avg_statements_per_summary,
            "source_article_histogram": {
                str(k): v for k, v in sorted(self.source_article_histogram.items())
            },
        }


@dataclass(frozen=True)
class Corpus:
    articles: tuple[Article, ...]
    events: tuple[EventCluster, ...]
    examples: tuple[SummaryExample, ...]
    statements: tuple["ReportedStatement", ...] = ()
    articles_by_id: dict[str, Article] = field(
        init=False, repr=False, compare=False, default_factory=dict)
    events_by_id: dict[str, EventCluster] = field(
        init=False, repr=False, compare=False, default_factory=dict)
    examples_by_id: dict[str, SummaryExample] = field(
        init=False, repr=False, compare=False, default_factory=dict)
    statements_by_id: dict[str, "ReportedStatement"] = field(
        init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "articles_by_id", {a.id: a for a in self.articles})
        object.__setattr__(self, "events_by_id", {e.event_id: e for e in self.events})
        object.__setattr__(
            self, "examples_by_id", {x.example_id: x for x in self.examples})
        object.__setattr__(
            self, "statements_by_id", {s.statement_id: s for s in self.statements})


def _read_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(str(path), line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise MalformedLine(str(path), line_no, "line is not a JSON object")
            yield line_no, obj


def _require(obj: dict, key: str, typ: type, path: Path, line_no: int):
    if key not in obj:
        raise MalformedLine(str(path), line_no, f"missing field {key!r}")
    val = obj[key]
    if not isinstance(val, typ):
        raise MalformedLine(
            str(path), line_no, f"field {key!r} must be {typ.__name__}")
    return val


def _str_list(obj: dict, key: str, path: Path, line_no: int) -> tuple[str, ...]:
    val = _require(obj, key, list, path, line_no)
    if not all(isinstance(x, str) for x in val):
        raise MalformedLine(str(path), line_no, f"field {key!r} must hold strings")
    return tuple(val)


def _parse_sentences(raw, text: str, path: Path, line_no: int) -> tuple[Interval, ...]:
    if not isinstance(raw, list):
        raise MalformedLine(str(path), line_no, "'sentences' must be a list")
    spans: list[Interval] = []
    prev_end = 0
    for item in raw:
        if (not isinstance(item, list) or len(item) != 2
                or not all(isinstance(v, int) for v in item)):
            raise MalformedLine(
                str(path), line_no, "'sentences' entries must be [start, end] ints")
        start, end = item
        if not (0 <= start < end <= len(text)):
            raise MalformedLine(
                str(path), line_no,
                f"sentence span [{start}, {end}) out of bounds for text "
                f"of length {len(text)}")
        if start < prev_end:
            raise MalformedLine(
                str(path), line_no, "sentence spans must be sorted and disjoint")
        prev_end = end
        spans.append((start, end))
    return tuple(spans)


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus directory; raises CorpusError subclasses."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")

    articles: list[Article] = []
    article_ids: dict[str, int] = {}
    articles_path = root / "articles.jsonl"
    if articles_path.exists():
        for line_no, obj in _read_jsonl(articles_path):
            art_id = _require(obj, "id", str, articles_path, line_no)
            if art_id in article_ids:
                raise DuplicateId(str(articles_path), line_no, art_id)
            article_ids[art_id] = line_no
            text = unicodedata.normalize(
                "NFC", _require(obj, "text", str, articles_path, line_no))
            if "sentences" in obj:
                sentences = _parse_sentences(
                    obj["sentences"], text, articles_path, line_no)
            else:
                sentences = tuple(segment_sentences(text))
            articles.append(Article(
                id=art_id,
                event_id=_require(obj, "event_id", str, articles_path, line_no),
                text=text,
                sentences=sentences,
                url=obj.get("url"),
                published=obj.get("published"),
            ))

    events: list[EventCluster] = []
    event_ids: set[str] = set()
    events_path = root / "events.jsonl"
    if events_path.exists():
        for line_no, obj in _read_jsonl(events_path):
            ev_id = _require(obj, "event_id", str, events_path, line_no)
            if ev_id in event_ids:
                raise DuplicateId(str(events_path), line_no, ev_id)
            event_ids.add(ev_id)
            events.append(EventCluster(
                event_id=ev_id,
                name=_require(obj, "name", str, events_path, line_no),
                article_ids=_str_list(obj, "article_ids", events_path, line_no),
            ))

    examples: list[SummaryExample] = []
    example_ids: set[str] = set()
    examples_path = root / "examples.jsonl"
    if examples_path.exists():
        for line_no, obj in _read_jsonl(examples_path):
            ex_id = _require(obj, "example_id", str, examples_path, line_no)
            if ex_id in example_ids:
                raise DuplicateId(str(examples_path), line_no, ex_id)
            example_ids.add(ex_id)
            split = _require(obj, "split", str, examples_path, line_no)
            if split not in _SPLITS:
                raise MalformedLine(
                    str(examples_path), line_no, f"unknown split {split!r}")
            statement_ids = _str_list(obj, "statement_ids", examples_path, line_no)
            if not statement_ids:
                raise MalformedLine(
                    str(examples_path), line_no, "'statement_ids' must be non-empty")
            references = _str_list(obj, "references", examples_path, line_no)
            if not 1 <= len(references) <= 2:
                raise MalformedLine(
                    str(examples_path), line_no,
                    "'references' must hold 1 or 2 summaries")
            examples.append(SummaryExample(
                example_id=ex_id,
                event_id=_require(obj, "event_id", str, examples_path, line_no),
                speaker=_require(obj, "speaker", str, examples_path, line_no),
                statement_ids=statement_ids,
                references=references,
                split=split,
            ))

    statements: tuple = ()
    statements_path = root / "statements.jsonl"
    if statements_path.exists():
        from .attribution import read_statements  # deferred: attribution imports us

        statements = tuple(read_statements(statements_path))
        seen: set[str] = set()
        for st in statements:
            if st.statement_id in seen:
                raise DuplicateId(str(statements_path), 0, st.statement_id)
            seen.add(st.statement_id)

    # Cross-reference checks run only after every file has been parsed.
    for art in articles:
        if art.event_id not in event_ids:
            raise DanglingReference("event", art.event_id, f"article {art.id}")
    for ev in events:
        for art_id in ev.article_ids:
            if art_id not in article_ids:
                raise DanglingReference("article", art_id, f"event {ev.event_id}")
    statement_id_set = {s.statement_id for s in statements}
    for ex in examples:
        if ex.event_id not in event_ids:
            raise DanglingReference("event", ex.event_id, f"example {ex.example_id}")
        if statements:
            for st_id in ex.statement_ids:
                if st_id not in statement_id_set:
                    raise DanglingReference(
                        "statement", st_id, f"example {ex.example_id}")
    for st in statements:
        if st.article_id not in article_ids:
            raise DanglingReference(
                "article", st.article_id, f"statement {st.statement_id}")

    return Corpus(
        articles=tuple(articles),
        events=tuple(events),
        examples=tuple(examples),
        statements=statements,
    )


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus back out as JSONL files; inverse of load_corpus."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    with (root / "articles.jsonl").open("w", encoding="utf-8") as fh:
        for art in corpus.articles:
            obj: dict[str, Any] = {
                "id": art.id,
                "event_id": art.event_id,
                "text": art.text,
                "sentences": [[s, e] for s, e in art.sentences],
            }
            if art.url is not None:
                obj["url"] = art.url
            if art.published is not None:
                obj["published"] = art.published
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")

    with (root / "events.jsonl").open("w", encoding="utf-8") as fh:
        for ev in corpus.events:
            fh.write(json.dumps({
                "event_id": ev.event_id,
                "name": ev.name,
                "article_ids": list(ev.article_ids),
            }, ensure_ascii=False, sort_keys=True) + "\n")

    with (root / "examples.jsonl").open("w", encoding="utf-8") as fh:
        for ex in corpus.examples:
            fh.write(json.dumps({
                "example_id": ex.example_id,
                "event_id": ex.event_id,
                "speaker": ex.speaker,
                "statement_ids": list(ex.statement_ids),
                "references": list(ex.references),
                "split": ex.split,
            }, ensure_ascii=False, sort_keys=True) + "\n")

    if corpus.statements:
        from .attribution import write_statements

        write_statements(corpus.statements, root / "statements.jsonl")


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Aggregate descriptive statistics over a loaded corpus."""
    by_split = {s: 0 for s in _SPLITS}
    for ex in corpus.examples:
        by_split[ex.split] += 1

    ref_lengths = [
        len(ref.split()) for ex in corpus.examples for ref in ex.references]
    avg_words = sum(ref_lengths) / len(ref_lengths) if ref_lengths else 0.0
    stmt_counts = [len(ex.statement_ids) for ex in corpus.examples]
    avg_stmts = sum(stmt_counts) / len(stmt_counts) if stmt_counts else 0.0

    if corpus.statements:
        n_statements = len(corpus.statements)
        speakers = {
            st.speaker_name.casefold().strip()
            for st in corpus.statements if st.speaker_name}
        n_speakers = len(speakers)
    else:
        # Without gold statements fall back to what the examples expose.
        n_statements = len({
            st_id for ex in corpus.examples for st_id in ex.statement_ids})
        n_speakers = len({ex.speaker.casefold().strip() for ex in corpus.examples})

    histogram: dict[int, int] = {}
    for ex in corpus.examples:
        event = corpus.events_by_id.get(ex.event_id)
        n_src = len(event.article_ids) if event else 0
        histogram[n_src] = histogram.get(n_src, 0) + 1
    total = len(corpus.examples)
    hist_frac = {k: v / total for k, v in histogram.items()} if total else {}

    return CorpusStats(
        n_examples=len(corpus.examples),
        n_train=by_split["train"],
        n_dev=by_split["dev"],
        n_test=by_split["test"],
        n_articles=len(corpus.articles),
        n_events=len(corpus.events),
        n_statements=n_statements,
        n_speakers=n_speakers,
        avg_summary_words=avg_words,
        avg_statements_per_summary=avg_stmts,
        source_article_histogram=hist_frac,
    )


def novel_ngram_pct(summary: str, sources: list[str], n: int) -> float:
    """Percentage of the summary's n-grams absent from every source text."""
    grams = ngrams(tokenize(summary), n)
    if not grams:
        log.debug("summary has no %d-grams; novelty reported as 0.0", n)
        return 0.0
    seen: set[tuple[str, ...]] = set()
    for src in sources:
        seen.update(ngrams(tokenize(src), n))
    novel = sum(1 for g in grams if g not in seen)
    return 100.0 * novel / len(grams)
