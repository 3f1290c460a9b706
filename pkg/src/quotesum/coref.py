"""Deterministic speaker coreference: alias clustering and statement grouping.

No learned models: clustering runs a fixed ladder of string rules over
normalized names (exact, token subsequence, acronym, optional one-edit
spelling match), and pronouns attach to the nearest preceding nominal
mention within the same article.
"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .attribution import ReportedStatement, SpeakerMention
from .corpus import Article

log = logging.getLogger(__name__)

# Salutations and leading title/position words dropped from speaker names.
_HONORIFICS = {
    "mr", "mrs", "ms", "miss", "mx", "dr", "prof", "professor", "sir",
    "dame", "lord", "lady", "rev", "reverend", "fr", "father", "rabbi",
    "imam", "sheikh", "pastor", "bishop", "saint", "st",
    "president", "vice", "sen", "senator", "rep", "representative",
    "congressman", "congresswoman", "gov", "governor", "mayor", "judge",
    "justice", "secretary", "minister", "chancellor", "premier",
    "ambassador", "speaker", "chairman", "chairwoman", "chairperson",
    "spokesman", "spokeswoman", "spokesperson", "gen", "general", "col",
    "colonel", "capt", "captain", "lt", "lieutenant", "sgt", "sergeant",
    "adm", "admiral", "cmdr", "commander", "officer", "det", "detective",
    "king", "queen", "prince", "princess",
}

_EDGE_PUNCT = " \t\n\r,.;:!?()[]{}\"'‘’“”-"


class NoMatch(LookupError):
    def __init__(self, query: str):
        super().__init__(f"no speaker cluster matches {query!r}")
        self.query = query


@dataclass(frozen=True)
class SpeakerCluster:
    canonical_name: str
    aliases: frozenset[str]
    mentions: tuple[SpeakerMention, ...]
    kind: str  # person | organization | unknown

    def __post_init__(self):
        if self.canonical_name not in self.aliases:
            raise ValueError("canonical name must be one of the aliases")
        if not self.mentions:
            raise ValueError("cluster without mentions")


@dataclass(frozen=True)
class StatementGroup:
    event_id: str
    cluster: SpeakerCluster
    statements: tuple[ReportedStatement, ...]

    @property
    def group_key(self) -> str:
        return f"{self.event_id}::{self.cluster.canonical_name}"


def normalize_name(surface: str) -> str:
    """Drop honorifics/titles and edge punctuation; keep case; idempotent."""
    cleaned = surface.strip(_EDGE_PUNCT)
    cleaned = re.sub(r"\s+", " ", cleaned)
    tokens = cleaned.split(" ")
    while len(tokens) > 1 and tokens[0].rstrip(".").casefold() in _HONORIFICS:
        tokens = tokens[1:]
    out = " ".join(t.strip(_EDGE_PUNCT) for t in tokens).strip()
    out = re.sub(r"\s+", " ", out)
    if not out:
        log.debug("name %r normalized to empty string", surface)
    return out


def _cmp_tokens(name: str) -> list[str]:
    return [t.strip(_EDGE_PUNCT).casefold()
            for t in name.split() if t.strip(_EDGE_PUNCT)]


def _is_subsequence(short: Sequence[str], long_: Sequence[str]) -> bool:
    it = iter(long_)
    return all(tok in it for tok in short)


def _subsequence_match(a: str, b: str) -> bool:
    ta, tb = _cmp_tokens(a), _cmp_tokens(b)
    if not ta or not tb or ta == tb:
        return bool(ta) and ta == tb
    short, long_ = (ta, tb) if len(ta) <= len(tb) else (tb, ta)
    return len(short) < len(long_) and _is_subsequence(short, long_)


def _acronym_of(name: str) -> str | None:
    tokens = name.split()
    if len(tokens) == 1 and len(tokens[0]) >= 2 and tokens[0].isupper():
        return tokens[0]
    return None


def _initials(name: str) -> str:
    return "".join(t[0] for t in name.split() if t[:1].isupper()).upper()


def _acronym_match(a: str, b: str) -> bool:
    for short, full in ((a, b), (b, a)):
        acr = _acronym_of(short)
        if acr and len(full.split()) >= 2 and _initials(full) == acr:
            return True
    return False


def _edit1(a: str, b: str) -> bool:
    if a == b:
        return True
    if abs(len(a) - len(b)) > 1:
        return False
    # one substitution, insertion, or deletion
    i = 0
    while i < min(len(a), len(b)) and a[i] == b[i]:
        i += 1
    if len(a) == len(b):
        return a[i + 1:] == b[i + 1:]
    short, long_ = (a, b) if len(a) < len(b) else (b, a)
    return short[i:] == long_[i + 1:]


def _fuzzy_match(a: str, b: str) -> bool:
    ta, tb = _cmp_tokens(a), _cmp_tokens(b)
    if len(ta) != len(tb) or not ta:
        return False
    saw_variant = False
    for x, y in zip(ta, tb):
        if x == y:
            continue
        if len(x) >= 5 and len(y) >= 5 and _edit1(x, y):
            saw_variant = True
            continue
        return False
    return saw_variant


def names_match(a: str, b: str, fuzzy: bool = False) -> bool:
    """The resolution ladder shared by clustering and speaker lookup."""
    if a.casefold() == b.casefold():
        return True
    if _subsequence_match(a, b):
        return True
    if _acronym_match(a, b):
        return True
    return fuzzy and _fuzzy_match(a, b)


def load_aliases(path: str | Path) -> dict[str, tuple[str, ...]]:
    with Path(path).open(encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"alias file {path} must be a JSON object")
    out: dict[str, tuple[str, ...]] = {}
    for canonical, aliases in raw.items():
        if not isinstance(aliases, list) or not all(
                isinstance(a, str) for a in aliases):
            raise ValueError(f"aliases for {canonical!r} must be a string list")
        out[canonical] = tuple(aliases)
    return out


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def add(self, x: str):
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def resolve_mentions(mentions: Iterable[SpeakerMention],
                     articles: Sequence[Article],
                     gazetteer: dict[str, tuple[str, ...]] | None = None,
                     fuzzy: bool = False) -> list[SpeakerCluster]:
    """Partition mentions into speaker clusters; see module docstring."""
    art_pos = {a.id: i for i, a in enumerate(articles)}

    def doc_pos(m: SpeakerMention):
        return (art_pos.get(m.article_id, len(articles)),
                m.article_id, m.span[0], m.span[1])

    ordered = sorted(mentions, key=doc_pos)
    nominals = [m for m in ordered if m.kind != "pronominal"]
    pronouns = [m for m in ordered if m.kind == "pronominal"]

    # Unique normalized names in first-appearance order.
    norm_of: dict[int, str] = {}
    names: list[str] = []
    for m in nominals:
        name = normalize_name(m.surface) or m.surface.strip()
        norm_of[id(m)] = name
        if name not in names:
            names.append(name)

    gaz_canon: dict[str, str] = {}
    if gazetteer:
        for canonical, aliases in gazetteer.items():
            gaz_canon[normalize_name(canonical).casefold()] = canonical
            for alias in aliases:
                gaz_canon[normalize_name(alias).casefold()] = canonical

    uf = _UnionFind()
    for name in names:
        uf.add(name)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if names_match(a, b, fuzzy=fuzzy):
                uf.union(a, b)
            elif gaz_canon and gaz_canon.get(
                    a.casefold()) == gaz_canon.get(b.casefold(), object()):
                uf.union(a, b)

    # aliases keep the raw surfaces (whitespace-collapsed); normalization is
    # only a matching device, so "Joe R. Biden" survives with its period
    groups: dict[str, list[SpeakerMention]] = {}
    alias_sets: dict[str, list[str]] = {}
    for m in nominals:
        root = uf.find(norm_of[id(m)])
        groups.setdefault(root, []).append(m)
        bucket = alias_sets.setdefault(root, [])
        surface = " ".join(m.surface.split())
        if surface not in bucket:
            bucket.append(surface)

    # Pronouns attach to the nearest preceding nominal in the same article.
    pending: dict[str, list[SpeakerMention]] = {}
    unresolved: list[SpeakerMention] = []
    for pm in pronouns:
        best = None
        for nm in nominals:
            if nm.article_id != pm.article_id or doc_pos(nm) >= doc_pos(pm):
                continue
            if best is None or doc_pos(nm) > doc_pos(best):
                best = nm
        if best is None:
            unresolved.append(pm)
            log.debug("unresolved pronoun %r in %s", pm.surface, pm.article_id)
        else:
            pending.setdefault(uf.find(norm_of[id(best)]), []).append(pm)

    clusters: list[SpeakerCluster] = []
    for root in groups:
        members = groups[root] + pending.get(root, [])
        members.sort(key=doc_pos)
        aliases = alias_sets[root]
        # longest alias wins; ties go to the alias appearing earliest
        canonical = max(aliases, key=lambda a: (len(a), -aliases.index(a)))
        kind = "person"
        if any(m.kind == "organizational" for m in members) or any(
                _acronym_of(a) for a in aliases):
            kind = "organization"
        clusters.append(SpeakerCluster(
            canonical_name=canonical,
            aliases=frozenset(aliases),
            mentions=tuple(members),
            kind=kind,
        ))
    for pm in unresolved:
        clusters.append(SpeakerCluster(
            canonical_name=pm.surface,
            aliases=frozenset([pm.surface]),
            mentions=(pm,),
            kind="unknown",
        ))

    clusters.sort(key=lambda c: doc_pos(c.mentions[0]))
    return clusters


def group_statements(statements: Iterable[ReportedStatement],
                     clusters: Sequence[SpeakerCluster],
                     event_id: str,
                     articles: Sequence[Article] = ()) -> list[StatementGroup]:
    """One group per cluster that owns at least one statement.

    Statements without a usable speaker mention are orphans: logged and
    left out, never silently re-attached.
    """
    by_mention: dict[tuple[str, tuple[int, int]], int] = {}
    for ci, cluster in enumerate(clusters):
        for m in cluster.mentions:
            by_mention[(m.article_id, m.span)] = ci

    published = {a.id: a.published for a in articles}

    def order_key(st: ReportedStatement):
        date = published.get(st.article_id)
        return (date is None, date or "", st.article_id, st.spans[0][0])

    buckets: dict[int, list[ReportedStatement]] = {}
    orphans: list[str] = []
    for st in statements:
        if st.flagged or st.speaker is None:
            orphans.append(st.statement_id)
            continue
        ci = by_mention.get((st.speaker.article_id, st.speaker.span))
        if ci is None:
            orphans.append(st.statement_id)
            continue
        buckets.setdefault(ci, []).append(st)
    if orphans:
        log.warning("%d orphan statement(s) without a speaker: %s",
                    len(orphans), ", ".join(orphans[:5]))

    groups = [
        StatementGroup(
            event_id=event_id,
            cluster=clusters[ci],
            statements=tuple(sorted(sts, key=order_key)),
        )
        for ci, sts in buckets.items()
    ]
    groups.sort(key=lambda g: (g.cluster.canonical_name.casefold(),
                               g.cluster.canonical_name))
    return groups


def match_speaker(query: str, clusters: Sequence[SpeakerCluster],
                  fuzzy: bool = False) -> SpeakerCluster:
    """Find the cluster whose aliases best match the query name."""
    if not query.strip():
        raise NoMatch(query)
    q = normalize_name(query) or query.strip()

    def earliest(c: SpeakerCluster):
        m = c.mentions[0]
        return (m.article_id, m.span[0])

    ladder = [
        lambda a: a.casefold() == q.casefold(),
        lambda a: _subsequence_match(a, q),
        lambda a: _acronym_match(a, q),
    ]
    if fuzzy:
        ladder.append(lambda a: _fuzzy_match(a, q))
    for rule in ladder:
        hits = [c for c in clusters if any(rule(a) for a in c.aliases)]
        if hits:
            hits.sort(key=lambda c: (-len(c.mentions), earliest(c)))
            return hits[0]
    raise NoMatch(query)


def write_groups(groups: Iterable[StatementGroup], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for g in groups:
            fh.write(json.dumps({
                "group_key": g.group_key,
                "event_id": g.event_id,
                "speaker": g.cluster.canonical_name,
                "aliases": sorted(g.cluster.aliases),
                "kind": g.cluster.kind,
                "statement_ids": [st.statement_id for st in g.statements],
            }, ensure_ascii=False, sort_keys=True) + "\n")


@dataclass(frozen=True)
class GroupRecord:
    group_key: str
    event_id: str
    speaker: str
    aliases: tuple[str, ...]
    kind: str
    statement_ids: tuple[str, ...]


def read_groups(path: str | Path) -> list[GroupRecord]:
    out: list[GroupRecord] = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(GroupRecord(
                group_key=obj["group_key"],
                event_id=obj["event_id"],
                speaker=obj["speaker"],
                aliases=tuple(obj["aliases"]),
                kind=obj.get("kind", "person"),
                statement_ids=tuple(obj["statement_ids"]),
            ))
    return out
