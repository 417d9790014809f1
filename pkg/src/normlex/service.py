"""Shared normalization runtime for the CLI and the HTTP server.

A Normalizer holds the loaded lexicon, one immutable index per language,
the relations graph, and the translator, and resolves ad-hoc terms.  Each
term is treated as its own single-mention document, so the graph
disambiguation step degenerates to a no-op for ad-hoc queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .index import FuzzyConfig, TermIndex, UnknownLanguage, build_index
from .pipeline import (
    DisambiguationConfig,
    Mention,
    SearchLevel,
    disambiguate_document,
    search_mode_restricted,
)
from .terminology import Lexicon, RelationGraph
from .translator import Translator

ENGLISH = "en"


@dataclass(frozen=True)
class NormalizationOutcome:
    term: str
    level: SearchLevel
    matched_term: str
    candidates: tuple[str, ...]
    cui: str | None


@dataclass
class Normalizer:
    lexicon: Lexicon
    relations: RelationGraph
    translator: Translator | None
    fuzzy: FuzzyConfig = field(default_factory=FuzzyConfig)
    disamb: DisambiguationConfig = field(default_factory=DisambiguationConfig)
    indexes: dict[str, TermIndex] = field(default_factory=dict)

    def index_for(self, lang: str) -> TermIndex:
        if lang not in self.indexes:
            self.indexes[lang] = build_index(self.lexicon, lang)
        return self.indexes[lang]

    def preload(self, langs: set[str]) -> None:
        for lang in sorted(langs | {ENGLISH}):
            self.index_for(lang)

    def normalize(
        self, term: str, lang: str, max_level: SearchLevel = SearchLevel.BTM
    ) -> NormalizationOutcome:
        if lang not in self.lexicon.languages:
            raise UnknownLanguage(f"language {lang!r} not in lexicon")
        byte_len = max(len(term.encode("utf-8")), 1)
        mention = Mention(
            doc_id="adhoc",
            mention_id="T1",
            spans=((0, byte_len),),
            surface=term,
            language=lang,
        )
        result = search_mode_restricted(
            mention,
            self.index_for(lang),
            self.index_for(ENGLISH),
            self.translator,
            self.fuzzy,
            max_level=max_level,
        )
        candidates = tuple(
            dict.fromkeys(c.cui.raw for c in result.candidates)
        )
        matched = result.candidates[0].matched_term.text if result.candidates else ""
        preds = disambiguate_document([result], self.lexicon, self.relations, self.disamb)
        cui = preds[0].cui.raw if preds else None
        return NormalizationOutcome(
            term=term,
            level=result.level,
            matched_term=matched,
            candidates=candidates,
            cui=cui,
        )
