"""Sequential candidate search and the disambiguation cascade.

Search runs at most three levels per mention and stops at the first one
that yields candidates:

    (i)   mono-lingual: the mention's language index          (ML)
    (ii)  cross-lingual: the untranslated term in English     (CL)
    (iii) translate, then look up in English                  (BTM)

Each level tries exact matching first and falls back to fuzzy matching
only when exact returns nothing.

Disambiguation filters each mention's candidate set in four steps:
semantic-group filter, preferred-label preference, densest-subgraph
peeling over the document, smallest concept id.  A step that would empty
a non-empty set is skipped, so every searched mention keeps at least one
candidate and yields exactly one prediction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .index import (
    Candidate,
    FuzzyConfig,
    TermIndex,
    exact_lookup,
    fuzzy_lookup,
    normalize_term,
)
from .terminology import ConceptId, Lexicon, RelationGraph, smallest_cui
from .translator import Translator


class SearchLevel(Enum):
    ML = "ML"
    CL = "CL"
    BTM = "BTM"
    NONE = "None"

    def __str__(self) -> str:
        return self.value


_LEVEL_RANK = {SearchLevel.ML: 1, SearchLevel.CL: 2, SearchLevel.BTM: 3}


@dataclass(frozen=True, slots=True)
class Mention:
    """An annotated span (possibly discontiguous) to normalize.

    Spans are byte offsets into the UTF-8 document text; the surface is
    the span texts joined by single spaces.
    """

    doc_id: str
    mention_id: str
    spans: tuple[tuple[int, int], ...]
    surface: str
    language: str

    def __post_init__(self) -> None:
        if not self.spans:
            raise ValueError("mention needs at least one span")
        prev_end = -1
        for start, end in self.spans:
            if start < 0 or end <= start:
                raise ValueError(f"bad span ({start}, {end})")
            if start < prev_end:
                raise ValueError("spans must be ordered and non-overlapping")
            prev_end = end


@dataclass(frozen=True)
class CandidateResult:
    """Candidates for one mention plus the search level that found them."""

    mention: Mention
    candidates: tuple[Candidate, ...]
    level: SearchLevel
    translated_query: str | None = None

    def __post_init__(self) -> None:
        if (self.level is SearchLevel.NONE) != (not self.candidates):
            raise ValueError("level NONE exactly when there are no candidates")
        if self.translated_query is not None and self.level is not SearchLevel.BTM:
            raise ValueError("translated_query is only set at level BTM")


@dataclass(frozen=True)
class DisambiguationConfig:
    allowed_sem_groups: frozenset[str] | None = None
    use_preferred_step: bool = True
    use_graph_step: bool = True


@dataclass(frozen=True, slots=True)
class Prediction:
    doc_id: str
    mention_id: str
    cui: ConceptId
    level: SearchLevel


def _lookup(index: TermIndex, query, fuzzy: FuzzyConfig) -> list[Candidate]:
    hits = exact_lookup(index, query)
    if hits:
        return hits
    return fuzzy_lookup(index, query, fuzzy)


def search_mode_restricted(
    mention: Mention,
    target_index: TermIndex,
    english_index: TermIndex,
    translator: Translator | None,
    fuzzy: FuzzyConfig,
    max_level: SearchLevel,
) -> CandidateResult:
    """Sequential search truncated after ``max_level``.

    The translator is only invoked when levels (i) and (ii) both come up
    empty and the BTM level is enabled.
    """
    if max_level not in _LEVEL_RANK:
        raise ValueError("max_level must be ML, CL, or BTM")
    if mention.language != target_index.lang:
        raise ValueError(
            f"mention language {mention.language!r} does not match index {target_index.lang!r}"
        )
    rank = _LEVEL_RANK[max_level]
    query = normalize_term(mention.surface)

    hits = _lookup(target_index, query, fuzzy)
    if hits:
        return CandidateResult(mention=mention, candidates=tuple(hits), level=SearchLevel.ML)
    if rank >= 2:
        hits = _lookup(english_index, query, fuzzy)
        if hits:
            return CandidateResult(mention=mention, candidates=tuple(hits), level=SearchLevel.CL)
    if rank >= 3 and translator is not None:
        translated = translator.translate(query.text)
        if translated:
            hits = _lookup(english_index, normalize_term(translated), fuzzy)
            if hits:
                return CandidateResult(
                    mention=mention,
                    candidates=tuple(hits),
                    level=SearchLevel.BTM,
                    translated_query=translated,
                )
    return CandidateResult(mention=mention, candidates=(), level=SearchLevel.NONE)


def sequential_search(
    mention: Mention,
    target_index: TermIndex,
    english_index: TermIndex,
    translator: Translator | None,
    fuzzy: FuzzyConfig,
) -> CandidateResult:
    """Full three-level search (equivalent to max_level=BTM)."""
    return search_mode_restricted(
        mention, target_index, english_index, translator, fuzzy, SearchLevel.BTM
    )


def filter_semantic(
    candidates: list[Candidate], lexicon: Lexicon, allowed: frozenset[str] | None
) -> list[Candidate]:
    """Keep candidates whose concept carries an allowed semantic group.

    Non-destructive: when no candidate qualifies, or no filter is given,
    the input is returned unchanged.
    """
    if not allowed or not candidates:
        return candidates
    kept = [
        c
        for c in candidates
        if c.cui in lexicon.by_cui and lexicon.by_cui[c.cui].sem_groups & allowed
    ]
    return kept or candidates


def prefer_preferred(candidates: list[Candidate]) -> list[Candidate]:
    """Keep candidates matched via a preferred term, if any exist."""
    preferred = [c for c in candidates if c.preferred]
    return preferred or candidates


def densest_subgraph_step(
    doc_candidates: Mapping[str, set[ConceptId]], relations: RelationGraph
) -> dict[str, set[ConceptId]]:
    """Greedy minimum-degree peeling over the document's candidate graph.

    Nodes are (mention, cui) pairs; edges connect related concepts of
    different mentions.  While some mention still holds several candidates
    and some removable node has positive degree, the minimum-degree node
    among removable ones is dropped (ties: largest numeric cui, then
    lexicographically largest mention id).  Mentions never lose their last
    candidate.
    """
    remaining = {mid: set(cuis) for mid, cuis in doc_candidates.items()}
    if any(not cuis for cuis in remaining.values()):
        raise ValueError("every mention must hold at least one candidate")

    nodes = [(mid, cui) for mid in sorted(remaining) for cui in sorted(remaining[mid])]
    neighbors: dict[tuple[str, ConceptId], set[tuple[str, ConceptId]]] = {n: set() for n in nodes}
    for i, (mid_a, cui_a) in enumerate(nodes):
        for mid_b, cui_b in nodes[i + 1 :]:
            if mid_a != mid_b and relations.connected(cui_a, cui_b):
                neighbors[(mid_a, cui_a)].add((mid_b, cui_b))
                neighbors[(mid_b, cui_b)].add((mid_a, cui_a))
    degree = {n: len(adj) for n, adj in neighbors.items()}

    while True:
        removable = [
            (mid, cui)
            for mid, cuis in remaining.items()
            if len(cuis) > 1
            for cui in cuis
        ]
        if not removable:
            break
        if all(degree[n] == 0 for n in removable):
            break
        min_degree = min(degree[n] for n in removable)
        pool = [n for n in removable if degree[n] == min_degree]
        victim = max(pool, key=lambda n: (n[1].numeric_value, n[0]))
        mid, cui = victim
        remaining[mid].discard(cui)
        for other in neighbors.pop(victim):
            neighbors[other].discard(victim)
            degree[other] -= 1
        del degree[victim]
    return remaining


def disambiguate_document(
    doc_results: Iterable[CandidateResult],
    lexicon: Lexicon,
    relations: RelationGraph,
    cfg: DisambiguationConfig,
) -> list[Prediction]:
    """Run the four-step cascade; one prediction per searched mention."""
    searched = [r for r in doc_results if r.level is not SearchLevel.NONE]
    per_mention: dict[str, list[Candidate]] = {}
    level_by_mention: dict[str, SearchLevel] = {}
    mention_order: list[Mention] = []
    for result in searched:
        mention = result.mention
        candidates = list(result.candidates)
        candidates = filter_semantic(candidates, lexicon, cfg.allowed_sem_groups)
        if cfg.use_preferred_step:
            candidates = prefer_preferred(candidates)
        per_mention[mention.mention_id] = candidates
        level_by_mention[mention.mention_id] = result.level
        mention_order.append(mention)

    cui_sets = {mid: {c.cui for c in cands} for mid, cands in per_mention.items()}
    if cfg.use_graph_step and cui_sets:
        cui_sets = densest_subgraph_step(cui_sets, relations)

    predictions = []
    for mention in mention_order:
        mid = mention.mention_id
        predictions.append(
            Prediction(
                doc_id=mention.doc_id,
                mention_id=mid,
                cui=smallest_cui(cui_sets[mid]),
                level=level_by_mention[mid],
            )
        )
    return predictions
