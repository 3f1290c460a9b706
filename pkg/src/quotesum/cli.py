"""Command-line pipeline: extract | group | summarize | silver-gen | evaluate | stats.

Configuration comes from an optional TOML file plus flags (flags win).
Diagnostics go to stderr; primary outputs are files under --out-dir, echoed
to stdout only with --stdout.  Exit codes: 0 ok, 2 config error, 3 corpus or
missing-input error, 4 no speaker match, 5 LLM unavailable.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .attribution import (extract_statements, merge_running_quotes,
                          read_statements, write_statements)
from .coref import (GroupRecord, NoMatch, SpeakerCluster, StatementGroup,
                    group_statements, load_aliases, match_speaker,
                    read_groups, resolve_mentions, write_groups)
from .corpus import Corpus, CorpusError, corpus_stats, load_corpus, novel_ngram_pct
from .lexicon import CueLexicon, default_lexicon, load_lexicon
from .metrics import (EvalOptions, evaluate_examples, read_predictions,
                      statement_texts, write_report)
from .summarize import (AuthError, EmptyCompletion, LlmConfig, LlmUnavailable,
                        fallback_summarize, generate_silver, summarize_group)

log = logging.getLogger("quotesum")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CORPUS = 3
EXIT_NO_MATCH = 4
EXIT_LLM = 5

_VALID_METRICS = ("rouge", "novelty", "mint", "entity")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    corpus_dir: Path
    out_dir: Path
    lexicon_path: Path | None = None
    aliases_path: Path | None = None
    tensors_path: Path | None = None
    jobs: int = 1
    fuzzy: bool = False
    stemming: bool = False
    fallback: bool = False
    fallback_max_words: int = 60
    speaker: str | None = None
    metrics: tuple[str, ...] = _VALID_METRICS
    llm: LlmConfig | None = None
    echo_stdout: bool = False


def _default_jobs() -> int:
    return min(os.cpu_count() or 1, 8)


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}")


def build_config(args: argparse.Namespace) -> RunConfig:
    raw = _load_toml(args.config) if args.config else {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")

    def pick(flag, key, default=None):
        if flag is not None:
            return flag
        return raw.get(key, default)

    corpus_dir = pick(args.corpus_dir, "corpus_dir")
    if not corpus_dir:
        raise ConfigError("corpus_dir is required (flag --corpus-dir or config)")
    out_dir = pick(args.out_dir, "out_dir", "out")

    jobs = pick(args.jobs, "jobs", _default_jobs())
    if not isinstance(jobs, int) or jobs < 1:
        raise ConfigError(f"jobs must be a positive integer, got {jobs!r}")

    metrics_raw = pick(getattr(args, "metrics", None), "metrics")
    if metrics_raw is None:
        metrics = _VALID_METRICS
    else:
        if isinstance(metrics_raw, str):
            metrics = tuple(m.strip() for m in metrics_raw.split(",") if m.strip())
        else:
            metrics = tuple(metrics_raw)
        bad = [m for m in metrics if m not in _VALID_METRICS]
        if bad:
            raise ConfigError(f"unknown metrics: {', '.join(bad)}")

    llm_raw = raw.get("llm")
    llm = None
    if llm_raw is not None:
        if not isinstance(llm_raw, dict):
            raise ConfigError("[llm] must be a table")
        try:
            llm = LlmConfig(**llm_raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [llm] config: {exc}")

    max_words = raw.get("fallback_max_words", 60)
    if not isinstance(max_words, int) or max_words < 1:
        raise ConfigError("fallback_max_words must be a positive integer")

    def opt_path(flag, key):
        val = pick(flag, key)
        return Path(val) if val else None

    return RunConfig(
        corpus_dir=Path(corpus_dir),
        out_dir=Path(out_dir),
        lexicon_path=opt_path(None, "lexicon"),
        aliases_path=opt_path(None, "aliases"),
        tensors_path=opt_path(None, "tagger_tensors"),
        jobs=jobs,
        fuzzy=bool(pick(args.fuzzy, "fuzzy", False)),
        stemming=bool(pick(args.stemming, "stemming", False)),
        fallback=bool(pick(args.fallback, "fallback", False)),
        fallback_max_words=max_words,
        speaker=getattr(args, "speaker", None),
        metrics=metrics,
        llm=llm,
        echo_stdout=bool(args.stdout),
    )


def _check_input(path: Path, what: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


def _load_lexicon(cfg: RunConfig) -> CueLexicon:
    if cfg.lexicon_path is None:
        return default_lexicon()
    _check_input(cfg.lexicon_path, "lexicon file")
    try:
        return load_lexicon(cfg.lexicon_path)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _echo(cfg: RunConfig, path: Path) -> None:
    if cfg.echo_stdout:
        sys.stdout.write(path.read_text(encoding="utf-8"))


def cmd_extract(cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.corpus_dir)
    lexicon = _load_lexicon(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)

    def run(article):
        return merge_running_quotes(
            extract_statements(article, lexicon), article)

    if cfg.jobs > 1 and len(corpus.articles) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            per_article = list(pool.map(run, corpus.articles))
    else:
        per_article = [run(a) for a in corpus.articles]

    statements = [st for sts in per_article for st in sts]
    out_path = cfg.out_dir / "statements.jsonl"
    write_statements(statements, out_path)
    flagged = sum(1 for st in statements if st.flagged)
    log.info("extracted %d statement(s) from %d article(s); %d without "
             "a speaker", len(statements), len(corpus.articles), flagged)
    _echo(cfg, out_path)
    return EXIT_OK


def cmd_group(cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.corpus_dir)
    statements = read_statements(
        _check_input(cfg.out_dir / "statements.jsonl", "statements file"))
    gazetteer = None
    if cfg.aliases_path is not None:
        gazetteer = load_aliases(_check_input(cfg.aliases_path, "alias file"))

    by_article: dict[str, list] = {}
    for st in statements:
        by_article.setdefault(st.article_id, []).append(st)

    def run(event):
        articles = [corpus.articles_by_id[a] for a in event.article_ids
                    if a in corpus.articles_by_id]
        ev_statements = [st for a in articles for st in by_article.get(a.id, [])]
        mentions = [st.speaker for st in ev_statements if st.speaker is not None]
        clusters = resolve_mentions(mentions, articles, gazetteer=gazetteer,
                                    fuzzy=cfg.fuzzy)
        return group_statements(ev_statements, clusters, event.event_id,
                                articles)

    events = sorted(corpus.events, key=lambda e: e.event_id)
    if cfg.jobs > 1 and len(events) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            per_event = list(pool.map(run, events))
    else:
        per_event = [run(e) for e in events]

    groups = [g for gs in per_event for g in gs]
    grouped_ids = {st.statement_id for g in groups for st in g.statements}
    orphans = [st.statement_id for st in statements
               if st.statement_id not in grouped_ids]
    out_path = cfg.out_dir / "groups.jsonl"
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_groups(groups, out_path)
    log.info("grouped %d statement(s) into %d group(s) across %d event(s); "
             "%d orphan(s)", len(grouped_ids), len(groups), len(events),
             len(orphans))
    _echo(cfg, out_path)
    return EXIT_OK


def _rebuild_groups(cfg: RunConfig, corpus: Corpus) -> list[StatementGroup]:
    """Reassemble StatementGroups from groups.jsonl + statements.jsonl."""
    records = read_groups(
        _check_input(cfg.out_dir / "groups.jsonl", "groups file"))
    statements = read_statements(
        _check_input(cfg.out_dir / "statements.jsonl", "statements file"))
    by_id = {st.statement_id: st for st in statements}

    groups = []
    for rec in records:
        sts = tuple(by_id[st_id] for st_id in rec.statement_ids
                    if st_id in by_id)
        if len(sts) != len(rec.statement_ids):
            raise CorpusError(
                f"group {rec.group_key} references statements missing from "
                f"statements.jsonl")
        mentions = tuple(st.speaker for st in sts if st.speaker is not None)
        cluster = SpeakerCluster(
            canonical_name=rec.speaker,
            aliases=frozenset(rec.aliases) | {rec.speaker},
            mentions=mentions,
            kind=rec.kind,
        )
        groups.append(StatementGroup(
            event_id=rec.event_id, cluster=cluster, statements=sts))
    return groups


def _require_llm(cfg: RunConfig) -> LlmConfig:
    if cfg.llm is None:
        raise ConfigError(
            "an [llm] config section is required unless --fallback is given")
    return cfg.llm


def cmd_summarize(cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.corpus_dir)
    groups = _rebuild_groups(cfg, corpus)
    articles = corpus.articles_by_id

    if cfg.speaker is not None:
        clusters = [g.cluster for g in groups]
        target = match_speaker(cfg.speaker, clusters, fuzzy=cfg.fuzzy)
        selected = [(g.group_key, g) for g in groups if g.cluster is target]
    else:
        # pair each gold example with its speaker's group in the same event
        by_event: dict[str, list[StatementGroup]] = {}
        for g in groups:
            by_event.setdefault(g.event_id, []).append(g)
        selected = []
        for ex in corpus.examples:
            candidates = by_event.get(ex.event_id, [])
            try:
                cluster = match_speaker(
                    ex.speaker, [g.cluster for g in candidates], fuzzy=cfg.fuzzy)
            except NoMatch:
                log.warning("no extracted group for example %s (speaker %r)",
                            ex.example_id, ex.speaker)
                continue
            group = next(g for g in candidates if g.cluster is cluster)
            selected.append((ex.example_id, group))

    bucket = None
    llm = None
    if not cfg.fallback:
        llm = _require_llm(cfg)

    def work(item):
        key, group = item
        if cfg.fallback:
            return key, fallback_summarize(group, articles,
                                           cfg.fallback_max_words)
        return key, summarize_group(group, llm, articles, bucket)

    if llm is not None and llm.max_concurrent_requests > 1 and len(selected) > 1:
        with ThreadPoolExecutor(
                max_workers=llm.max_concurrent_requests) as pool:
            results = list(pool.map(work, selected))
    else:
        results = [work(item) for item in selected]

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out_dir / "predictions.jsonl"
    with out_path.open("w", encoding="utf-8") as fh:
        for key, summary in sorted(results, key=lambda kv: kv[0]):
            fh.write(json.dumps({
                "example_id": key,
                "summary": summary.text,
                "provenance": summary.provenance,
                "model": summary.model_name,
            }, ensure_ascii=False, sort_keys=True) + "\n")
    log.info("wrote %d summar%s to %s", len(results),
             "y" if len(results) == 1 else "ies", out_path)
    _echo(cfg, out_path)
    return EXIT_OK


def cmd_silver_gen(cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.corpus_dir)
    groups = _rebuild_groups(cfg, corpus)
    llm = cfg.llm if cfg.llm is not None else None
    if not cfg.fallback:
        llm = _require_llm(cfg)
    if llm is None:
        # fallback generation still needs concurrency defaults
        llm = LlmConfig(endpoint_url="http://localhost:0/unused",
                        model_name="extractive-fallback")
    result = generate_silver(
        groups, llm, corpus.articles_by_id, cfg.out_dir / "silver.jsonl",
        use_fallback=cfg.fallback, fallback_max_words=cfg.fallback_max_words)
    log.info("silver generation: %d written, %d skipped (resume), %d failed",
             result.n_written, result.n_skipped, result.n_failed)
    for err in result.errors[:10]:
        log.error("silver failure: %s", err)
    if result.n_failed and not result.n_written and not result.n_skipped:
        raise LlmUnavailable("every group failed")
    _echo(cfg, cfg.out_dir / "silver.jsonl")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.corpus_dir)
    predictions = read_predictions(
        _check_input(cfg.out_dir / "predictions.jsonl", "predictions file"))
    options = EvalOptions(metrics=cfg.metrics, stemming=cfg.stemming,
                          jobs=cfg.jobs)
    report = evaluate_examples(predictions, corpus, options)
    write_report(report, cfg.out_dir)
    log.info("scored %d/%d example(s); %d missing prediction(s)",
             report.n_scored, report.n_examples, len(report.missing))
    _echo(cfg, cfg.out_dir / "report.json")
    return EXIT_OK


def cmd_stats(cfg: RunConfig) -> int:
    corpus = load_corpus(cfg.corpus_dir)
    stats = corpus_stats(corpus)
    payload: dict = {"corpus": stats.as_dict()}

    if corpus.statements and corpus.examples:
        novelty: dict[str, float] = {}
        for n in (1, 2, 3, 4):
            vals = []
            for ex in corpus.examples:
                sources = statement_texts(corpus, ex.statement_ids)
                for ref in ex.references:
                    vals.append(novel_ngram_pct(ref, sources, n))
            novelty[str(n)] = sum(vals) / len(vals) if vals else 0.0
        payload["novel_ngrams_pct"] = novelty
    else:
        log.info("no gold statements: novel n-gram table skipped")

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out_dir / "stats.json"
    with out_path.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")
    log.info("%d example(s), %d article(s), %d event(s), %d statement(s), "
             "%d speaker(s)", stats.n_examples, stats.n_articles,
             stats.n_events, stats.n_statements, stats.n_speakers)
    _echo(cfg, out_path)
    return EXIT_OK


_COMMANDS = {
    "extract": cmd_extract,
    "group": cmd_group,
    "summarize": cmd_summarize,
    "silver-gen": cmd_silver_gen,
    "evaluate": cmd_evaluate,
    "stats": cmd_stats,
}


class _JsonFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return json.dumps({
            "level": record.levelname.lower(),
            "logger": record.name,
            "message": record.getMessage(),
        }, ensure_ascii=False)


def _setup_logging(log_json: bool, verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if log_json:
        handler.setFormatter(_JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quotesum",
        description="Extract, group, summarize, and score reported speech "
                    "in event-clustered news.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("extract", "extract reported statements per article"),
            ("group", "cluster speakers and group statements per event"),
            ("summarize", "generate one summary per example or speaker"),
            ("silver-gen", "batch-generate silver summaries for all groups"),
            ("evaluate", "score predictions against references"),
            ("stats", "corpus statistics and novelty table")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--corpus-dir", help="corpus directory")
        p.add_argument("--out-dir", help="output directory (default: out)")
        p.add_argument("--jobs", type=int, help="parallel workers "
                       "(default: logical cores, capped at 8)")
        p.add_argument("--fallback", action="store_true", default=None,
                       help="use the offline extractive summarizer")
        p.add_argument("--fuzzy", action="store_true", default=None,
                       help="enable one-edit spelling matches in coref")
        p.add_argument("--stemming", action="store_true", default=None,
                       help="Porter-stem tokens for ROUGE")
        p.add_argument("--speaker", help="restrict summarize to one speaker")
        p.add_argument("--metrics", help="comma list: rouge,novelty,mint,entity")
        p.add_argument("--log-json", action="store_true",
                       help="machine-readable stderr logging")
        p.add_argument("--verbose", action="store_true",
                       help="debug-level logging")
        p.add_argument("--seed", type=int, default=None,
                       help="accepted for interface stability; the pipeline "
                            "has no randomized components")
        p.add_argument("--stdout", action="store_true",
                       help="echo the primary output file to stdout")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _setup_logging(args.log_json, args.verbose)
    if args.seed is not None:
        log.info("--seed has no effect: all operations are deterministic")
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (CorpusError, FileNotFoundError, NotADirectoryError) as exc:
        log.error("input error: %s", exc)
        return EXIT_CORPUS
    except NoMatch as exc:
        log.error("%s", exc)
        return EXIT_NO_MATCH
    except (LlmUnavailable, AuthError, EmptyCompletion) as exc:
        log.error("llm error: %s", exc)
        return EXIT_LLM


if __name__ == "__main__":
    sys.exit(main())
