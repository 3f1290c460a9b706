"""quotesum: extract, group, summarize, and score reported speech in news."""

from .attribution import (ReportedStatement, SpeakerMention,
                          extract_statements, merge_running_quotes,
                          read_statements, write_statements)
from .coref import (NoMatch, SpeakerCluster, StatementGroup, group_statements,
                    match_speaker, names_match, normalize_name,
                    resolve_mentions)
from .corpus import (Article, Corpus, CorpusError, CorpusStats,
                     DanglingReference, DuplicateId, EventCluster,
                     MalformedLine, SummaryExample, corpus_stats, load_corpus,
                     novel_ngram_pct, save_corpus)
from .lexicon import CueLexicon, default_lexicon, load_lexicon, save_lexicon
from .metrics import (EmptySummary, EvalOptions, MetricReport, PrfScore,
                      entity_precision, evaluate_examples, extract_entities,
                      mint, rouge_l, rouge_multi, rouge_n, span_prf,
                      speaker_em_f1)
from .segmenting import detect_direct_quotes, paragraph_spans, segment_sentences
from .stemming import porter_stem
from .summarize import (AuthError, EmptyCompletion, GeneratedSummary,
                        LlmConfig, LlmUnavailable, build_prompt,
                        fallback_summarize, generate_silver, summarize_group)
from .tagger import (DimensionMismatch, DomainError, TaggerTensors,
                     classify_paragraph, decode_bio, joint_loss,
                     load_tagger_tensors, sigmoid, softmax_rows,
                     token_label_probs)
from .tokens import ngrams, tokenize

__version__ = "0.1.0"

__all__ = [
    "Article", "AuthError", "Corpus", "CorpusError", "CorpusStats",
    "CueLexicon", "DanglingReference", "DimensionMismatch", "DomainError",
    "DuplicateId", "EmptyCompletion", "EmptySummary", "EvalOptions",
    "EventCluster", "GeneratedSummary", "LlmConfig", "LlmUnavailable",
    "MalformedLine", "MetricReport", "NoMatch", "PrfScore",
    "ReportedStatement", "SpeakerCluster", "SpeakerMention",
    "StatementGroup", "SummaryExample", "TaggerTensors", "build_prompt",
    "classify_paragraph", "corpus_stats", "decode_bio", "default_lexicon",
    "detect_direct_quotes", "entity_precision", "evaluate_examples",
    "extract_entities", "extract_statements", "fallback_summarize",
    "generate_silver", "group_statements", "joint_loss", "load_corpus",
    "load_lexicon", "load_tagger_tensors", "match_speaker",
    "merge_running_quotes", "mint", "names_match", "ngrams",
    "normalize_name", "novel_ngram_pct", "paragraph_spans", "porter_stem",
    "read_statements", "resolve_mentions", "rouge_l", "rouge_multi",
    "rouge_n", "save_corpus", "save_lexicon", "segment_sentences", "sigmoid",
    "softmax_rows", "span_prf", "speaker_em_f1", "summarize_group",
    "token_label_probs", "tokenize", "write_statements",
]
