"""Sentence boundary detection and direct-quotation span detection.

Both operations work on raw article text and return half-open character
intervals [start, end). They share one quotation-mark pairing scheme so a
sentence is never split inside a balanced quote pair.
"""

import logging

log = logging.getLogger(__name__)

# Double-quote family. Straight " toggles; curly marks are directional.
_DQ_OPEN = {'"', '“'}   # " and left double quote
_DQ_CLOSE = {'"', '”'}  # " and right double quote
# Single-quote family. Straight ' is ambiguous with apostrophes.
_SQ_OPEN = {"'", '‘'}
_SQ_CLOSE = {"'", '’'}

_SENT_END = {'.', '!', '?'}
_TRAILING_CLOSERS = {')', ']', '"', '”', "'", '’'}
_OPENERS = {'"', '“', '‘', "'", '(', '['}


def _is_apostrophe(text: str, i: int) -> bool:
    """A single-quote mark flanked by letters is an apostrophe, not a quote."""
    ch = text[i]
    if ch not in ("'", '’'):
        return False
    before = text[i - 1] if i > 0 else ''
    after = text[i + 1] if i + 1 < len(text) else ''
    return before.isalpha() and after.isalpha()


def _quote_events(text: str):
    """Yield (index, kind) quote events; kind is 'open' or 'close'.

    Pairing uses a stack: straight double quotes toggle, curly quotes are
    directional, and single quotes only pair when they are plausibly
    quotation marks (apostrophes are skipped). Events carry enough for
    callers to rebuild the stack themselves.
    """
    stack: list[str] = []  # entries: 'd' double, 's' single
    for i, ch in enumerate(text):
        if ch in _DQ_OPEN or ch in _DQ_CLOSE:
            if ch == '"':
                if stack and stack[-1] == 'd':
                    stack.pop()
                    yield i, 'close'
                else:
                    stack.append('d')
                    yield i, 'open'
            elif ch in _DQ_OPEN:
                stack.append('d')
                yield i, 'open'
            else:
                if stack and stack[-1] == 'd':
                    stack.pop()
                    yield i, 'close'
                # stray right-double with no open: ignore
        elif ch in _SQ_OPEN or ch in _SQ_CLOSE:
            if _is_apostrophe(text, i):
                continue
            if ch == '‘':
                stack.append('s')
                yield i, 'open'
            elif ch == '’':
                if stack and stack[-1] == 's':
                    stack.pop()
                    yield i, 'close'
            else:  # straight '
                prev = text[i - 1] if i > 0 else ' '
                nxt = text[i + 1] if i + 1 < len(text) else ' '
                if stack and stack[-1] == 's':
                    stack.pop()
                    yield i, 'close'
                elif ((prev.isspace() or prev in _OPENERS or i == 0)
                      and not nxt.isspace() and not nxt.isdigit()):
                    # a digit right after suggests elision ('70s), not a quote
                    stack.append('s')
                    yield i, 'open'
                # else: possessive/stray apostrophe, skip


def detect_direct_quotes(text: str) -> list[tuple[int, int]]:
    """Find maximal quoted spans; intervals cover the text between the marks.

    Nested quotes are folded into the enclosing span. An unpaired opening
    mark yields an open-ended span running to the end of the text, which is
    logged as suspect.
    """
    spans: list[tuple[int, int]] = []
    open_stack: list[int] = []  # content-start indices of open quotes
    for i, kind in _quote_events(text):
        if kind == 'open':
            open_stack.append(i + 1)
        else:
            start = open_stack.pop()
            if not open_stack:  # only top-level pairs become spans
                spans.append((start, i))
    if open_stack:
        start = open_stack[0]
        log.debug("unpaired quotation mark at %d; emitting open-ended span", start - 1)
        spans.append((start, len(text)))
    spans.sort()
    return spans


def segment_sentences(text: str) -> list[tuple[int, int]]:
    """Split text into sentence intervals.

    Boundaries occur at sentence-final punctuation (with trailing closing
    marks attached) followed by whitespace and an uppercase letter, digit, or
    opening quote; never inside a balanced quotation pair. A blank line
    always forces a boundary. Intervals are trimmed to non-whitespace.
    """
    n = len(text)
    if not text.strip():
        return []

    events = dict(_quote_events(text))
    boundaries: list[int] = []  # candidate end positions (exclusive)
    depth = 0
    i = 0
    while i < n:
        ch = text[i]
        kind = events.get(i)
        if kind == 'open':
            depth += 1
            i += 1
            continue
        if kind == 'close':
            depth -= 1
            # A closing quote directly after sentence-final punctuation ends
            # the sentence too ('He said "Stop."' followed by a new sentence).
            # Walk back over nested closers so '?'" also counts.
            k = i - 1
            while k >= 0 and text[k] in _TRAILING_CLOSERS:
                k -= 1
            if depth == 0 and k >= 0 and text[k] in _SENT_END:
                end = _consume_closers(text, i + 1, events)
                if _boundary_follows(text, end):
                    boundaries.append(end)
                    i = end
                    continue
            i += 1
            continue
        if ch in _SENT_END and depth == 0:
            end = i + 1
            while end < n and text[end] in _SENT_END:
                end += 1
            end = _consume_closers(text, end, events)
            if _boundary_follows(text, end):
                boundaries.append(end)
                i = end
                continue
            i = end
            continue
        if ch == '\n':
            # blank line: hard paragraph boundary regardless of punctuation
            j = i
            saw_second = False
            while j < n and text[j].isspace():
                if text[j] == '\n' and j > i:
                    saw_second = True
                j += 1
            if saw_second:
                boundaries.append(i)
                i = j
                continue
        i += 1

    boundaries.append(n)
    sentences: list[tuple[int, int]] = []
    start = 0
    for b in boundaries:
        seg = text[start:b]
        ls = len(seg) - len(seg.lstrip())
        rs = len(seg) - len(seg.rstrip())
        if seg.strip():
            sentences.append((start + ls, b - rs))
        start = b
    return sentences


def _consume_closers(text: str, pos: int, events: dict) -> int:
    """Attach closing quotes/brackets that directly follow end punctuation."""
    n = len(text)
    while pos < n and text[pos] in _TRAILING_CLOSERS:
        # only consume quote chars that actually close something here
        if text[pos] in (')', ']') or events.get(pos) == 'close':
            pos += 1
        else:
            break
    return pos


def _boundary_follows(text: str, pos: int) -> bool:
    n = len(text)
    if pos >= n:
        return True
    if not text[pos].isspace():
        return False
    j = pos
    while j < n and text[j].isspace():
        j += 1
    if j >= n:
        return True
    nxt = text[j]
    return nxt.isupper() or nxt.isdigit() or nxt in _OPENERS


def paragraph_spans(text: str) -> list[tuple[int, int]]:
    """Intervals of paragraphs, split on blank lines, trimmed."""
    spans: list[tuple[int, int]] = []
    n = len(text)
    start = 0
    i = 0
    while i <= n:
        at_break = False
        if i == n:
            at_break = True
            j = n
        elif text[i] == '\n':
            j = i
            newlines = 0
            while j < n and text[j].isspace():
                if text[j] == '\n':
                    newlines += 1
                j += 1
            at_break = newlines >= 2
        if at_break:
            seg = text[start:i]
            ls = len(seg) - len(seg.lstrip())
            rs = len(seg) - len(seg.rstrip())
            if seg.strip():
                spans.append((start + ls, i - rs))
            if i == n:
                break
            start = j
            i = j
        else:
            i += 1
    return spans
