"""Reported-speech extraction: cue spotting, speaker binding, quote typing.

Works sentence by sentence over an article.  A statement is emitted for every
sentence containing an attribution cue; the speaker is the nearest noun
phrase bound to the cue by one of a few ordered surface patterns.  Running
quotes from one speaker are merged afterwards, within paragraph bounds.
"""

import json
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from .corpus import Article, Interval, MalformedLine
from .lexicon import CueLexicon
from .segmenting import detect_direct_quotes, paragraph_spans

log = logging.getLogger(__name__)

QUOTE_TYPES = ("direct", "indirect", "mixed")
PRONOUNS = {"he", "she", "they", "it"}

_TOKEN = re.compile(r"[^\W_]+")

# Determiner/possessive right before a cue form marks a noun use ("the claim").
_DETERMINERS = {
    "the", "a", "an", "this", "that", "these", "those", "my", "your", "his",
    "her", "its", "our", "their", "no", "any", "some", "each", "every",
    "another", "such", "one",
}

# Tokens the backward speaker scan steps over (adverbs, auxiliaries).
_SKIPPABLE = {
    "also", "then", "again", "later", "earlier", "once", "twice", "never",
    "not", "has", "have", "had", "will", "would", "can", "could", "may",
    "might", "must", "is", "are", "was", "were", "been", "be", "since",
    "still", "just", "yet", "often", "already", "even", "who",
}

# Function words that never open a name run on their own.
_NP_STOP = {
    "the", "a", "an", "while", "but", "however", "when", "after", "before",
    "although", "though", "if", "as", "and", "or", "in", "on", "at", "by",
    "for", "with", "from", "to", "of", "that", "this", "meanwhile", "so",
    "yet", "still", "then",
}

# Head nouns that keep a full "X of Y" phrase together ("University of ...").
_ORG_HEADS = {
    "university", "college", "city", "department", "bank", "ministry",
    "office", "council", "committee", "school", "institute", "agency",
    "association", "court", "house", "senate", "board", "bureau",
    "commission", "administration", "company", "corporation", "church",
    "union", "federation", "academy", "center", "centre", "hospital",
    "museum", "party", "government", "organization", "commonwealth",
}

# Tokens anywhere in a run that mark an organization rather than a person.
_ORG_TOKENS = {
    "news", "inc", "corp", "co", "ltd", "llc", "press", "network", "media",
    "journal", "broadcasting", "police", "army",
}

_GAP_CHARS = set(" .'’-& ")


@dataclass(frozen=True)
class SpeakerMention:
    article_id: str
    span: Interval
    surface: str
    kind: str  # nominal | pronominal | organizational


@dataclass(frozen=True)
class ReportedStatement:
    statement_id: str
    article_id: str
    spans: tuple[Interval, ...]
    cue_span: Interval
    cue: str            # matched surface form ("said")
    cue_base: str       # lexicon base form ("say")
    quote_type: str
    speaker: SpeakerMention | None
    speaker_name: str
    flagged: bool = False

    def text(self, article: Article) -> str:
        return " ".join(article.text[s:e] for s, e in self.spans)


@dataclass(frozen=True)
class _Tok:
    text: str
    start: int
    end: int

    @property
    def cap(self) -> bool:
        return self.text[:1].isupper()

    @property
    def low(self) -> str:
        return self.text.casefold()


def _tokens_in(text: str, start: int, end: int) -> list[_Tok]:
    return [
        _Tok(m.group(), start + m.start(), start + m.end())
        for m in _TOKEN.finditer(text[start:end])
    ]


def _inside(pos: int, spans: list[Interval]) -> bool:
    return any(s <= pos < e for s, e in spans)


def _overlap(span: Interval, spans: list[Interval]) -> int:
    s, e = span
    return sum(max(0, min(e, qe) - max(s, qs)) for qs, qe in spans)


def _gap_ok(text: str, left_end: int, right_start: int) -> bool:
    gap = text[left_end:right_start]
    return 0 < len(gap) <= 3 and set(gap) <= _GAP_CHARS


class _Binder:
    """Speaker binding for one sentence's token list."""

    def __init__(self, article: Article, tokens: list[_Tok], quotes: list[Interval]):
        self.article = article
        self.text = article.text
        self.tokens = tokens
        self.quotes = quotes

    def _run_around(self, idx: int) -> tuple[int, int]:
        """Widest capitalized run through tokens[idx], as token indices."""
        toks = self.tokens
        lo = hi = idx
        while lo - 1 >= 0 and toks[lo - 1].cap and _gap_ok(
                self.text, toks[lo - 1].end, toks[lo].start):
            lo -= 1
        while hi + 1 < len(toks) and toks[hi + 1].cap and _gap_ok(
                self.text, toks[hi].end, toks[hi + 1].start):
            hi += 1
        while lo < hi and toks[lo].low in _NP_STOP:
            lo += 1
        return lo, hi

    def _mention_from_run(self, lo: int, hi: int) -> SpeakerMention | None:
        toks = self.tokens
        if lo > hi:
            return None
        if lo == hi and toks[lo].low in _NP_STOP:
            return None
        # "X of Y": prefer the person X unless X heads an institution name.
        if (lo - 2 >= 0 and toks[lo - 1].low == "of" and toks[lo - 2].cap):
            x_lo, x_hi = self._run_around(lo - 2)
            x_head = toks[x_hi].low
            if self._mention_from_run(x_lo, x_hi) is not None:
                if x_head in _ORG_HEADS:
                    lo = x_lo  # keep "University of Y" whole
                else:
                    lo, hi = x_lo, x_hi
        start, end = toks[lo].start, toks[hi].end
        surface = self.text[start:end]
        kind = "nominal"
        run_lows = {toks[k].low for k in range(lo, hi + 1)}
        if (run_lows & _ORG_TOKENS
                or toks[hi].low in _ORG_HEADS or toks[lo].low in _ORG_HEADS):
            kind = "organizational"
        return SpeakerMention(self.article.id, (start, end), surface, kind)

    def _pronoun_at(self, idx: int) -> SpeakerMention | None:
        tok = self.tokens[idx]
        if tok.low in PRONOUNS:
            return SpeakerMention(
                self.article.id, (tok.start, tok.end), tok.text, "pronominal")
        return None

    def backward(self, cue_lo: int) -> SpeakerMention | None:
        """Patterns "<NP> <cue>" and ", <NP> <appositive>, <cue>"."""
        toks = self.tokens
        j = cue_lo - 1
        right_edge = toks[cue_lo].start if cue_lo < len(toks) else len(self.text)
        skip_gap = False
        while j >= 0:
            tok = toks[j]
            if _inside(tok.start, self.quotes):
                return None  # never bind a speaker from inside a quote
            gap = self.text[tok.end:right_edge]
            if "," in gap and not skip_gap:
                # Crossing into an appositive or relative clause: resume left
                # of its opening comma ("Hurt, opinion editor, told ...").
                k = j
                while k > 0 and "," not in self.text[toks[k - 1].end:toks[k].start]:
                    k -= 1
                if k == 0:
                    return None
                right_edge = toks[k].start
                j = k - 1
                skip_gap = True
                continue
            skip_gap = False
            mention = self._pronoun_at(j)
            if mention is not None:
                return mention
            if tok.cap:
                lo, hi = self._run_around(j)
                return self._mention_from_run(lo, min(hi, j))
            if tok.low in _SKIPPABLE or (tok.low.endswith("ly") and len(tok.low) > 3):
                right_edge = tok.start
                j -= 1
                continue
            return None
        return None

    def forward(self, cue_hi: int) -> SpeakerMention | None:
        """Patterns "<cue> <NP>" and "according to <NP>"."""
        toks = self.tokens
        j = cue_hi + 1
        while j < len(toks) and toks[j].low in {"the", "a", "an"}:
            j += 1
        if j >= len(toks):
            return None
        tok = toks[j]
        if _inside(tok.start, self.quotes):
            return None
        mention = self._pronoun_at(j)
        if mention is not None:
            return mention
        if tok.cap:
            lo, hi = self._run_around(j)
            return self._mention_from_run(max(lo, j), hi)
        return None


def _quote_type(spans: Iterable[Interval], quotes: list[Interval]) -> str:
    total = sum(e - s for s, e in spans)
    if total == 0:
        return "indirect"
    quoted = sum(_overlap(sp, quotes) for sp in spans)
    if quoted == 0:
        return "indirect"
    return "direct" if quoted / total >= 0.5 else "mixed"


def extract_statements(article: Article,
                       lexicon: CueLexicon) -> list[ReportedStatement]:
    """One pass over the article's sentences; pure apart from debug logging."""
    text = article.text
    quotes = detect_direct_quotes(text)
    out: list[ReportedStatement] = []

    for sent in article.sentences:
        s, e = sent
        tokens = _tokens_in(text, s, e)
        binder = _Binder(article, tokens, quotes)

        # (rank, position, token_lo, token_hi, span, base)
        candidates: list[tuple[int, int, int, int, Interval, str]] = []
        for idx, tok in enumerate(tokens):
            base = lexicon.form_to_base.get(tok.low)
            if base is None:
                continue
            if _inside(tok.start, quotes):
                continue
            if idx > 0 and tokens[idx - 1].low in _DETERMINERS:
                continue  # noun use: "the claim", "his report"
            rank = lexicon.cue_rank(tok.low)
            candidates.append(
                (rank, tok.start, idx, idx, (tok.start, tok.end), base))
        sent_text = text[s:e].casefold()
        for phrase in lexicon.phrasal:
            for m in re.finditer(re.escape(phrase), sent_text):
                p_start, p_end = s + m.start(), s + m.end()
                if _inside(p_start, quotes):
                    continue
                lo = next((i for i, t in enumerate(tokens) if t.start >= p_start), 0)
                hi = next(
                    (i for i in range(len(tokens) - 1, -1, -1)
                     if tokens[i].end <= p_end), lo)
                candidates.append((0, p_start, lo, hi, (p_start, p_end), phrase))

        if not candidates:
            continue
        candidates.sort(key=lambda c: (c[0], c[1]))

        chosen = candidates[0]
        mention = None
        for cand in candidates:
            _, _, lo, hi, _, base = cand
            if base not in lexicon.phrasal:
                mention = binder.backward(lo)
            if mention is None:
                mention = binder.forward(hi)
            if mention is not None:
                chosen = cand
                break
        if mention is None:
            log.debug("no speaker bound in %s at %s", article.id, sent)

        _, _, _, _, cue_span, base = chosen
        out.append(ReportedStatement(
            statement_id=f"{article.id}:s{len(out):03d}",
            article_id=article.id,
            spans=(sent,),
            cue_span=cue_span,
            cue=text[cue_span[0]:cue_span[1]],
            cue_base=base,
            quote_type=_quote_type([sent], quotes),
            speaker=mention,
            speaker_name=mention.surface if mention else "",
            flagged=mention is None,
        ))

    # Pronouns resolve to the nearest preceding nominal speaker in the article.
    resolved: list[ReportedStatement] = []
    for i, st in enumerate(out):
        if st.speaker is not None and st.speaker.kind == "pronominal":
            for prev in reversed(resolved):
                if prev.speaker is not None and prev.speaker.kind != "pronominal":
                    st = replace(st, speaker_name=prev.speaker_name)
                    break
        resolved.append(st)
    return resolved


def _same_person(a: str, b: str) -> bool:
    """Equal names, or one's tokens are an ordered subsequence of the other's."""
    ta = a.casefold().split()
    tb = b.casefold().split()
    if not ta or not tb:
        return False
    if ta == tb:
        return True
    short, long_ = (ta, tb) if len(ta) <= len(tb) else (tb, ta)
    it = iter(long_)
    return all(tok in it for tok in short)


def merge_running_quotes(statements: list[ReportedStatement],
                         article: Article) -> list[ReportedStatement]:
    """Join adjacent-sentence statements by one speaker, within a paragraph."""
    if not statements:
        return []
    quotes = detect_direct_quotes(article.text)
    paragraphs = paragraph_spans(article.text)

    def para_of(span: Interval) -> int:
        for i, (ps, pe) in enumerate(paragraphs):
            if ps <= span[0] and span[1] <= pe:
                return i
        return -1

    sent_index = {span: i for i, span in enumerate(article.sentences)}

    def first_idx(st):
        return sent_index.get(st.spans[0], -1)

    def last_idx(st):
        return sent_index.get(st.spans[-1], -1)

    merged = sorted(statements, key=lambda st: st.spans[0][0])

    # Absorb quote-only continuation sentences that carry no cue of their own.
    covered = {idx for st in merged for sp in st.spans
               if (idx := sent_index.get(sp, -1)) >= 0}
    for idx, span in enumerate(article.sentences):
        if idx in covered or _quote_type([span], quotes) != "direct":
            continue
        for pos, st in enumerate(merged):
            if last_idx(st) == idx - 1 and para_of(st.spans[-1]) == para_of(span):
                merged[pos] = replace(st, spans=st.spans + (span,))
                covered.add(idx)
                break

    out: list[ReportedStatement] = []
    for st in merged:
        prev = out[-1] if out else None
        if (prev is not None
                and not prev.flagged and not st.flagged
                and first_idx(st) == last_idx(prev) + 1
                and para_of(st.spans[0]) == para_of(prev.spans[-1])
                and _same_person(prev.speaker_name, st.speaker_name)):
            name = max(prev.speaker_name, st.speaker_name, key=len)
            out[-1] = replace(prev, spans=prev.spans + st.spans,
                              speaker_name=name)
        else:
            out.append(st)

    return [
        replace(st, quote_type=_quote_type(st.spans, quotes)) for st in out
    ]


def write_statements(statements: Iterable[ReportedStatement],
                     path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for st in statements:
            obj = {
                "statement_id": st.statement_id,
                "article_id": st.article_id,
                "spans": [[s, e] for s, e in st.spans],
                "cue_span": list(st.cue_span),
                "cue": st.cue,
                "cue_base": st.cue_base,
                "quote_type": st.quote_type,
                "speaker": None if st.speaker is None else {
                    "span": list(st.speaker.span),
                    "surface": st.speaker.surface,
                    "kind": st.speaker.kind,
                },
                "speaker_name": st.speaker_name,
                "flagged": st.flagged,
            }
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def read_statements(path: str | Path) -> list[ReportedStatement]:
    out: list[ReportedStatement] = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(str(path), line_no, f"invalid JSON: {exc}")
            try:
                raw_speaker = obj["speaker"]
                speaker = None if raw_speaker is None else SpeakerMention(
                    article_id=obj["article_id"],
                    span=tuple(raw_speaker["span"]),
                    surface=raw_speaker["surface"],
                    kind=raw_speaker["kind"],
                )
                st = ReportedStatement(
                    statement_id=obj["statement_id"],
                    article_id=obj["article_id"],
                    spans=tuple((s, e) for s, e in obj["spans"]),
                    cue_span=tuple(obj["cue_span"]),
                    cue=obj["cue"],
                    cue_base=obj.get("cue_base", obj["cue"]),
                    quote_type=obj["quote_type"],
                    speaker=speaker,
                    speaker_name=obj.get("speaker_name", ""),
                    flagged=bool(obj.get("flagged", False)),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedLine(str(path), line_no, f"bad statement: {exc}")
            if st.quote_type not in QUOTE_TYPES:
                raise MalformedLine(
                    str(path), line_no, f"unknown quote_type {st.quote_type!r}")
            out.append(st)
    return out
