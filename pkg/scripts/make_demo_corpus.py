#!/usr/bin/env python3
"""Write a small, fully populated demo corpus.

Three hand-written articles over two events are run through the extraction
pipeline so that examples.jsonl points at real statement ids.  The result
is a corpus directory the CLI can consume end to end:

    python3 scripts/make_demo_corpus.py --out-dir demo_corpus
    python3 -m quotesum extract --corpus-dir demo_corpus --out-dir out
"""

import argparse
import sys
from pathlib import Path

from quotesum.attribution import extract_statements, merge_running_quotes
from quotesum.corpus import (Article, Corpus, EventCluster, SummaryExample,
                             load_corpus, save_corpus)
from quotesum.coref import group_statements, match_speaker, resolve_mentions
from quotesum.lexicon import default_lexicon
from quotesum.segmenting import segment_sentences

ARTICLES = (
    ("a1", "e1", """\
The city council approved a $2.1 billion budget on Tuesday night after \
weeks of negotiation.

"This budget protects core services without raising property taxes," Mayor \
Elena Ruiz said at a news conference. She added that the reserve fund would \
grow for the third straight year.

Council member David Okafor argued that the plan shortchanges road repair. \
According to Okafor, the paving backlog has doubled since 2022."""),
    ("a2", "e1", """\
Reaction to the budget vote continued on Wednesday.

Ruiz told reporters the city would publish a line-by-line breakdown within \
the week. "Residents deserve to see exactly where every dollar goes," she \
said.

Police Chief Marcus Webb confirmed that the department's overtime budget \
stays flat. Webb noted that recruiting funds were expanded instead."""),
    ("a3", "e2", """\
A winter storm knocked out power to 40,000 homes across the county on \
Friday.

Governor Dana Whitfield declared a state of emergency in the morning. \
"Crews are working around the clock to restore service," Whitfield said.

According to Irene Vogel, a spokesperson for the utility, most customers \
should have power back by Sunday evening. Vogel insisted that last year's \
grid upgrades prevented a larger outage."""),
)

EVENTS = (
    ("e1", "city budget vote", ("a1", "a2")),
    ("e2", "winter storm outage", ("a3",)),
)

# example id, event, speaker query, references, split
EXAMPLES = (
    ("x1", "e1", "Elena Ruiz",
     ("Ruiz said the budget protects core services without raising property "
      "taxes, grows the reserve fund, and promised a line-by-line breakdown.",
      "Mayor Ruiz defended the budget as protecting services without tax "
      "increases and said a full breakdown would be published."),
     "train"),
    ("x2", "e1", "Okafor",
     ("Okafor argued the budget shortchanges road repair and said the "
      "paving backlog has doubled since 2022.",),
     "dev"),
    ("x3", "e2", "Whitfield",
     ("Governor Whitfield declared a state of emergency and said crews were "
      "working around the clock to restore service.",),
     "test"),
)


def build_demo_corpus() -> Corpus:
    lexicon = default_lexicon()
    articles = []
    statements = []
    for article_id, event_id, text in ARTICLES:
        art = Article(id=article_id, event_id=event_id, text=text,
                      sentences=tuple(segment_sentences(text)))
        articles.append(art)
        statements.extend(
            merge_running_quotes(extract_statements(art, lexicon), art))

    events = tuple(EventCluster(event_id=eid, name=name,
                                article_ids=article_ids)
                   for eid, name, article_ids in EVENTS)

    groups_by_event = {}
    for event in events:
        event_articles = [a for a in articles if a.event_id == event.event_id]
        event_statements = [s for s in statements
                            if s.article_id in event.article_ids]
        mentions = [s.speaker for s in event_statements
                    if s.speaker is not None]
        clusters = resolve_mentions(mentions, event_articles)
        groups_by_event[event.event_id] = (
            clusters,
            group_statements(event_statements, clusters, event.event_id,
                             event_articles))

    examples = []
    for example_id, event_id, speaker, references, split in EXAMPLES:
        clusters, groups = groups_by_event[event_id]
        cluster = match_speaker(speaker, clusters)
        group = next(g for g in groups
                     if g.cluster.canonical_name == cluster.canonical_name)
        examples.append(SummaryExample(
            example_id=example_id, event_id=event_id, speaker=speaker,
            statement_ids=tuple(s.statement_id for s in group.statements),
            references=references, split=split))

    return Corpus(articles=tuple(articles), events=events,
                  examples=tuple(examples), statements=tuple(statements))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", type=Path, default=Path("demo_corpus"))
    parser.add_argument("--force", action="store_true",
                        help="overwrite an existing directory")
    args = parser.parse_args(argv)

    if args.out_dir.exists() and any(args.out_dir.iterdir()) and not args.force:
        print(f"{args.out_dir} is not empty; pass --force to overwrite",
              file=sys.stderr)
        return 2

    corpus = build_demo_corpus()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, args.out_dir)
    reloaded = load_corpus(args.out_dir)  # sanity: the loader accepts it
    print(f"wrote {args.out_dir}: {len(reloaded.articles)} articles, "
          f"{len(reloaded.events)} events, {len(reloaded.examples)} examples, "
          f"{len(reloaded.statements)} statements")
    return 0


if __name__ == "__main__":
    sys.exit(main())
