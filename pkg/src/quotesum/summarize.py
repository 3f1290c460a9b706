"""Prompt construction and LLM-backed summary generation for statement groups.

The HTTP client is deliberately plain: JSON POST, bearer token from an
environment variable, exponential backoff on 429/5xx, a client-side token
bucket, and a bounded worker pool for batch runs.  A deterministic
extractive fallback covers offline use.
"""

import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence
from urllib.parse import urlparse

import requests

from .corpus import Article
from .coref import StatementGroup
from .segmenting import segment_sentences

log = logging.getLogger(__name__)

PROMPT_SUFFIX = "Summarize what {speaker} said:"
_TIMEOUT_S = 60


class LlmUnavailable(RuntimeError):
    pass


class AuthError(RuntimeError):
    pass


class EmptyCompletion(RuntimeError):
    pass


@dataclass(frozen=True)
class LlmConfig:
    endpoint_url: str
    model_name: str
    api_key_env: str = "QUOTESUM_API_KEY"
    temperature: float = 0.0
    max_tokens: int = 256
    max_concurrent_requests: int = 4
    retry_max: int = 5
    backoff_base_ms: int = 500
    mode: str = "completion"  # or "chat"
    requests_per_second: float = 0.0  # 0 disables the client-side bucket

    def __post_init__(self):
        parsed = urlparse(self.endpoint_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"endpoint_url is not a valid URL: "
                             f"{self.endpoint_url!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.max_concurrent_requests < 1:
            raise ValueError("max_concurrent_requests must be >= 1")
        if self.retry_max < 0 or self.backoff_base_ms < 0:
            raise ValueError("retry_max and backoff_base_ms must be >= 0")
        if self.mode not in ("completion", "chat"):
            raise ValueError(f"mode must be 'completion' or 'chat', "
                             f"got {self.mode!r}")


@dataclass(frozen=True)
class GeneratedSummary:
    key: str
    text: str
    provenance: str  # llm | fallback
    model_name: str
    attempts: int = 1
    request_id: str | None = None
    created_at: float = 0.0

    def __post_init__(self):
        if self.provenance == "llm" and not self.text:
            raise ValueError("llm summaries must be non-empty")


def _group_texts(group: StatementGroup,
                 articles: Mapping[str, Article]) -> list[str]:
    texts = []
    for st in group.statements:
        art = articles.get(st.article_id)
        if art is None:
            raise KeyError(f"statement {st.statement_id} references missing "
                           f"article {st.article_id}")
        texts.append(st.text(art))
    return texts


def build_prompt(group: StatementGroup,
                 articles: Mapping[str, Article]) -> str:
    """Statement texts joined by newlines, a blank line, then the question."""
    if not group.statements:
        raise ValueError("cannot build a prompt for an empty group")
    speaker = group.cluster.canonical_name
    if not speaker:
        raise ValueError("group has an empty speaker name")
    body = "\n".join(_group_texts(group, articles))
    return body + "\n\n" + PROMPT_SUFFIX.format(speaker=speaker)


class _TokenBucket:
    """Simple shared rate limiter; inert when rate <= 0."""

    def __init__(self, rate_per_s: float, capacity: int):
        self.rate = rate_per_s
        self.capacity = max(1, capacity)
        self.tokens = float(self.capacity)
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self):
        if self.rate <= 0:
            return
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(
                    self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


def _request_body(cfg: LlmConfig, prompt: str) -> dict:
    body: dict = {
        "model": cfg.model_name,
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }
    if cfg.mode == "chat":
        body["messages"] = [{"role": "user", "content": prompt}]
    else:
        body["prompt"] = prompt
    return body


def _completion_text(payload: dict) -> str:
    choices = payload.get("choices")
    if isinstance(choices, list) and choices:
        first = choices[0]
        if isinstance(first, dict):
            if isinstance(first.get("text"), str):
                return first["text"]
            message = first.get("message")
            if isinstance(message, dict) and isinstance(
                    message.get("content"), str):
                return message["content"]
    for key in ("completion", "text"):
        if isinstance(payload.get(key), str):
            return payload[key]
    return ""


def _headers(cfg: LlmConfig) -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(cfg.api_key_env, "")
    if key:
        headers["Authorization"] = f"Bearer {key}"
    else:
        log.warning("environment variable %s not set; request sent without "
                    "authorization", cfg.api_key_env)
    return headers


def request_completion(cfg: LlmConfig, prompt: str,
                       bucket: _TokenBucket | None = None) -> tuple[str, int, str | None]:
    """POST the prompt; returns (text, attempts, request_id).

    Retries 429/5xx/connection errors with exponential backoff, at most
    retry_max retries (retry_max + 1 requests).  401/403 aborts immediately.
    """
    last_error = "no request sent"
    for attempt in range(cfg.retry_max + 1):
        if bucket is not None:
            bucket.acquire()
        try:
            resp = requests.post(cfg.endpoint_url, json=_request_body(cfg, prompt),
                                 headers=_headers(cfg), timeout=_TIMEOUT_S)
        except requests.RequestException as exc:
            last_error = f"connection error: {exc}"
            log.debug("attempt %d failed: %s", attempt + 1, last_error)
        else:
            if resp.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials "
                                f"(HTTP {resp.status_code})")
            if resp.status_code == 200:
                try:
                    payload = resp.json()
                except ValueError as exc:
                    raise LlmUnavailable(f"non-JSON response: {exc}")
                text = _completion_text(payload).strip()
                if not text:
                    raise EmptyCompletion("endpoint returned an empty completion")
                request_id = payload.get("id") or resp.headers.get("x-request-id")
                return text, attempt + 1, request_id
            if resp.status_code == 429 or 500 <= resp.status_code < 600:
                last_error = f"HTTP {resp.status_code}"
                log.debug("attempt %d got %s", attempt + 1, last_error)
            else:
                raise LlmUnavailable(f"unexpected HTTP {resp.status_code}")
        if attempt < cfg.retry_max:
            time.sleep(cfg.backoff_base_ms / 1000.0 * (2 ** attempt))
    raise LlmUnavailable(
        f"gave up after {cfg.retry_max + 1} attempt(s): {last_error}")


def summarize_group(group: StatementGroup, cfg: LlmConfig,
                    articles: Mapping[str, Article],
                    bucket: _TokenBucket | None = None) -> GeneratedSummary:
    prompt = build_prompt(group, articles)
    text, attempts, request_id = request_completion(cfg, prompt, bucket)
    return GeneratedSummary(
        key=group.group_key,
        text=text,
        provenance="llm",
        model_name=cfg.model_name,
        attempts=attempts,
        request_id=request_id,
        created_at=time.time(),
    )


def fallback_summarize(group: StatementGroup,
                       articles: Mapping[str, Article],
                       max_words: int = 60) -> GeneratedSummary:
    """Offline extractive stand-in: first sentence of each statement."""
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    firsts = []
    for text in _group_texts(group, articles):
        sents = segment_sentences(text)
        if sents:
            s, e = sents[0]
            firsts.append(text[s:e])
    words = " ".join(firsts).split()
    return GeneratedSummary(
        key=group.group_key,
        text=" ".join(words[:max_words]),
        provenance="fallback",
        model_name="extractive-fallback",
        attempts=0,
        created_at=time.time(),
    )


@dataclass(frozen=True)
class SilverResult:
    n_written: int
    n_skipped: int
    n_failed: int
    errors: tuple[str, ...]


def _silver_line(summary: GeneratedSummary, speaker: str) -> str:
    return json.dumps({
        "group_key": summary.key,
        "speaker": speaker,
        "summary": summary.text,
        "model": summary.model_name,
        "provenance": summary.provenance,
        "attempts": summary.attempts,
    }, ensure_ascii=False, sort_keys=True)


def read_silver_keys(path: str | Path) -> set[str]:
    done: set[str] = set()
    path = Path(path)
    if not path.exists():
        return done
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                done.add(json.loads(line)["group_key"])
    return done


def generate_silver(groups: Sequence[StatementGroup], cfg: LlmConfig,
                    articles: Mapping[str, Article], out_path: str | Path,
                    use_fallback: bool = False,
                    fallback_max_words: int = 60) -> SilverResult:
    """Summarize every group into a JSONL file, incrementally and resumably.

    Groups already present in the output are skipped.  Failures are logged
    and collected; a finished run rewrites the file sorted by group key so
    equal inputs give byte-identical files at any concurrency.
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    done = read_silver_keys(out_path)
    todo = [g for g in groups if g.group_key not in done]
    skipped = len(groups) - len(todo)
    if skipped:
        log.info("resume: %d group(s) already summarized", skipped)

    errors: list[str] = []
    n_written = 0
    bucket = _TokenBucket(cfg.requests_per_second, cfg.max_concurrent_requests)

    def work(group: StatementGroup) -> GeneratedSummary:
        if use_fallback:
            return fallback_summarize(group, articles, fallback_max_words)
        return summarize_group(group, cfg, articles, bucket)

    with out_path.open("a", encoding="utf-8") as fh:
        with ThreadPoolExecutor(
                max_workers=cfg.max_concurrent_requests) as pool:
            futures = {pool.submit(work, g): g for g in todo}
            for fut in as_completed(futures):
                group = futures[fut]
                try:
                    summary = fut.result()
                except (LlmUnavailable, AuthError, EmptyCompletion,
                        KeyError) as exc:
                    errors.append(f"{group.group_key}: {exc}")
                    log.error("group %s failed: %s", group.group_key, exc)
                    continue
                fh.write(_silver_line(
                    summary, group.cluster.canonical_name) + "\n")
                fh.flush()
                n_written += 1

    if not errors:
        # canonicalize for byte-stable output across concurrency levels
        lines = [ln for ln in out_path.read_text(encoding="utf-8").splitlines()
                 if ln.strip()]
        lines.sort(key=lambda ln: json.loads(ln)["group_key"])
        tmp = out_path.with_suffix(out_path.suffix + ".tmp")
        tmp.write_text("\n".join(lines) + ("\n" if lines else ""),
                       encoding="utf-8")
        tmp.replace(out_path)

    return SilverResult(
        n_written=n_written,
        n_skipped=skipped,
        n_failed=len(errors),
        errors=tuple(errors),
    )
