"""Multilingual biomedical concept normalization toolkit.

Links text mentions to concept ids of a TSV lexicon through a sequential
mono-lingual / cross-lingual / translate-then-lookup candidate search and
a four-step disambiguation cascade, with a trainable character-level
translation model and an evaluation harness.
"""

from .errors import NormlexError
from .evalharness import (
    EvaluationReport,
    GoldDocument,
    GoldMention,
    Metrics,
    OffsetMismatch,
    ParseError,
    UnknownMention,
    read_gold_standoff,
    run_evaluation,
    score,
)
from .index import (
    Candidate,
    FuzzyConfig,
    MatchKind,
    NormalizedTerm,
    TermIndex,
    UnknownLanguage,
    build_index,
    exact_lookup,
    fuzzy_lookup,
    levenshtein,
    load_index,
    normalize_term,
    save_index,
    token_edit_budget,
)
from .pipeline import (
    CandidateResult,
    DisambiguationConfig,
    Mention,
    Prediction,
    SearchLevel,
    densest_subgraph_step,
    disambiguate_document,
    filter_semantic,
    prefer_preferred,
    search_mode_restricted,
    sequential_search,
)
from .service import NormalizationOutcome, Normalizer
from .terminology import (
    ConceptId,
    EmptyCandidates,
    Lexicon,
    LexiconError,
    MalformedRow,
    RelationGraph,
    RelationsError,
    TermRecord,
    load_lexicon,
    load_relations,
    smallest_cui,
)
from .translator import DictionaryTranslator, NeuralTranslator, Translator

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "CandidateResult",
    "ConceptId",
    "DictionaryTranslator",
    "DisambiguationConfig",
    "EmptyCandidates",
    "EvaluationReport",
    "FuzzyConfig",
    "GoldDocument",
    "GoldMention",
    "Lexicon",
    "LexiconError",
    "MalformedRow",
    "MatchKind",
    "Mention",
    "Metrics",
    "NeuralTranslator",
    "NormalizationOutcome",
    "NormalizedTerm",
    "Normalizer",
    "NormlexError",
    "OffsetMismatch",
    "ParseError",
    "Prediction",
    "RelationGraph",
    "RelationsError",
    "SearchLevel",
    "TermIndex",
    "TermRecord",
    "Translator",
    "UnknownLanguage",
    "UnknownMention",
    "build_index",
    "densest_subgraph_step",
    "disambiguate_document",
    "exact_lookup",
    "filter_semantic",
    "fuzzy_lookup",
    "levenshtein",
    "load_index",
    "load_lexicon",
    "load_relations",
    "normalize_term",
    "prefer_preferred",
    "read_gold_standoff",
    "run_evaluation",
    "save_index",
    "score",
    "search_mode_restricted",
    "sequential_search",
    "smallest_cui",
    "token_edit_budget",
]
