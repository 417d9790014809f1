"""Per-language term indexes with exact and bounded-fuzzy lookup.

Matching rules:

* queries and indexed terms are normalized (Unicode lowercasing, whitespace
  collapsed, no diacritic folding);
* exact lookup compares normalized text;
* fuzzy lookup pairs query and entry tokens positionally and allows a
  Levenshtein distance of ``max_edit_per_long_token`` (default 1) per query
  token of at least ``long_token_min_len`` characters (default 5); shorter
  tokens must match exactly.

Tokens are the maximal alphanumeric runs of the normalized text, so
punctuation variants of the same token sequence ("a-b" vs "a b") match
fuzzily even at edit budget zero.
"""

from __future__ import annotations

import io
import json
import re
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import NormlexError
from .terminology import ConceptId, Lexicon

_TOKEN_RE = re.compile(r"[^\W_]+")

CACHE_MAGIC = b"NLX1"
CACHE_FORMAT_VERSION = 1


class UnknownLanguage(NormlexError):
    """Requested language is not present in the lexicon/index set."""


class IndexCacheError(NormlexError):
    """Index cache file is unreadable, corrupt, or of an unsupported version."""


@dataclass(frozen=True, slots=True)
class NormalizedTerm:
    """Lowercased, whitespace-collapsed text plus its alphanumeric tokens."""

    text: str
    tokens: tuple[str, ...]


def normalize_term(raw: str) -> NormalizedTerm:
    """Normalize a surface string for lookup.

    Idempotent: feeding the resulting ``text`` back in reproduces the same
    value.  Diacritics are preserved.
    """
    text = " ".join(raw.lower().split())
    return NormalizedTerm(text=text, tokens=tuple(_TOKEN_RE.findall(text)))


@dataclass(frozen=True, slots=True)
class FuzzyConfig:
    """Edit budget rule for fuzzy matching."""

    max_edit_per_long_token: int = 1
    long_token_min_len: int = 5

    def __post_init__(self) -> None:
        if self.max_edit_per_long_token < 0:
            raise ValueError("max_edit_per_long_token must be >= 0")
        if self.long_token_min_len < 1:
            raise ValueError("long_token_min_len must be >= 1")


def token_edit_budget(token: str, cfg: FuzzyConfig) -> int:
    """Allowed edit distance for one query token (codepoint length rule)."""
    return cfg.max_edit_per_long_token if len(token) >= cfg.long_token_min_len else 0


def levenshtein(a: str, b: str) -> int:
    """Unit-cost insert/delete/substitute distance over Unicode codepoints."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _within_budget(a: str, b: str, budget: int) -> bool:
    if budget == 0:
        return a == b
    if abs(len(a) - len(b)) > budget:
        return False
    return levenshtein(a, b) <= budget


class MatchKind(Enum):
    EXACT = "exact"
    FUZZY = "fuzzy"


@dataclass(frozen=True, slots=True)
class IndexEntry:
    """One (normalized term, concept) pair of an index."""

    term: NormalizedTerm
    cui: ConceptId
    preferred: bool


@dataclass(frozen=True, slots=True)
class Candidate:
    """A lookup hit: concept, the indexed term it matched, and how."""

    cui: ConceptId
    matched_term: NormalizedTerm
    preferred: bool
    match_kind: MatchKind
    source_lang: str


@dataclass(frozen=True)
class TermIndex:
    """Immutable index over one language's lexicon terms.

    ``exact_map`` keys are normalized texts; ``token_count_buckets``
    partition the same entries by token count for fuzzy scanning.
    """

    lang: str
    exact_map: dict[str, tuple[IndexEntry, ...]]
    token_count_buckets: dict[int, tuple[IndexEntry, ...]] = field(repr=False)

    @property
    def entry_count(self) -> int:
        return sum(len(v) for v in self.exact_map.values())


def _index_from_entries(lang: str, entries: list[IndexEntry]) -> TermIndex:
    entries.sort(key=lambda e: (e.cui.numeric_value, e.term.text))
    exact: dict[str, list[IndexEntry]] = {}
    buckets: dict[int, list[IndexEntry]] = {}
    for entry in entries:
        exact.setdefault(entry.term.text, []).append(entry)
        buckets.setdefault(len(entry.term.tokens), []).append(entry)
    return TermIndex(
        lang=lang,
        exact_map={k: tuple(v) for k, v in exact.items()},
        token_count_buckets={k: tuple(v) for k, v in buckets.items()},
    )


def build_index(lexicon: Lexicon, lang: str) -> TermIndex:
    """Index all lexicon terms of one language.

    Entries are deduplicated per (normalized text, cui) pair; the preferred
    flag of a deduplicated entry is the OR over the merged rows.
    """
    if lang not in lexicon.languages:
        raise UnknownLanguage(f"language {lang!r} not in lexicon ({sorted(lexicon.languages)})")
    merged: dict[tuple[str, ConceptId], tuple[NormalizedTerm, bool]] = {}
    for rec in lexicon.records:
        if rec.lang != lang:
            continue
        norm = normalize_term(rec.term)
        key = (norm.text, rec.cui)
        prev = merged.get(key)
        merged[key] = (norm, rec.preferred or (prev[1] if prev else False))
    entries = [
        IndexEntry(term=norm, cui=cui, preferred=pref)
        for (_, cui), (norm, pref) in merged.items()
    ]
    return _index_from_entries(lang, entries)


def exact_lookup(index: TermIndex, query: NormalizedTerm) -> list[Candidate]:
    """All entries whose normalized text equals the query text."""
    return [
        Candidate(
            cui=e.cui,
            matched_term=e.term,
            preferred=e.preferred,
            match_kind=MatchKind.EXACT,
            source_lang=index.lang,
        )
        for e in index.exact_map.get(query.text, ())
    ]


def fuzzy_lookup(
    index: TermIndex, query: NormalizedTerm, cfg: FuzzyConfig | None = None
) -> list[Candidate]:
    """All entries within the per-token edit budgets of the query.

    Only entries with the query's token count are considered; token i of the
    entry must be within ``token_edit_budget(query.tokens[i])``.  Every hit
    is tagged FUZZY, including distance-zero ones.
    """
    cfg = cfg or FuzzyConfig()
    budgets = [token_edit_budget(tok, cfg) for tok in query.tokens]
    hits = []
    for entry in index.token_count_buckets.get(len(query.tokens), ()):
        if all(
            _within_budget(q, e, budget)
            for q, e, budget in zip(query.tokens, entry.term.tokens, budgets)
        ):
            hits.append(
                Candidate(
                    cui=entry.cui,
                    matched_term=entry.term,
                    preferred=entry.preferred,
                    match_kind=MatchKind.FUZZY,
                    source_lang=index.lang,
                )
            )
    hits.sort(key=lambda c: (c.cui.numeric_value, c.matched_term.text))
    return hits


def _write_section(buf: io.BytesIO, name: str, payload: bytes) -> None:
    name_b = name.encode("utf-8")
    buf.write(struct.pack("<I", len(name_b)))
    buf.write(name_b)
    buf.write(struct.pack("<Q", len(payload)))
    buf.write(payload)


def save_index(index: TermIndex, path: str | Path) -> None:
    """Write a versioned binary cache of the index."""
    entries = sorted(
        {(e.term.text, e.cui.raw, e.preferred) for es in index.exact_map.values() for e in es}
    )
    buf = io.BytesIO()
    buf.write(CACHE_MAGIC)
    meta = json.dumps(
        {"version": CACHE_FORMAT_VERSION, "lang": index.lang, "entry_count": len(entries)},
        sort_keys=True,
    ).encode("utf-8")
    _write_section(buf, "meta", meta)
    payload = json.dumps(
        [[text, cui, 1 if pref else 0] for text, cui, pref in entries],
        ensure_ascii=False,
        sort_keys=True,
    ).encode("utf-8")
    _write_section(buf, "entries", payload)
    Path(path).write_bytes(buf.getvalue())


def load_index(path: str | Path) -> TermIndex:
    """Load an index cache written by save_index."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IndexCacheError(f"cannot read index cache {path}: {exc}") from exc
    if len(data) < 4 or data[:4] != CACHE_MAGIC:
        raise IndexCacheError(f"bad magic in index cache {path}")
    sections: dict[str, bytes] = {}
    pos = 4
    while pos < len(data):
        try:
            (name_len,) = struct.unpack_from("<I", data, pos)
            pos += 4
            name = data[pos : pos + name_len].decode("utf-8")
            pos += name_len
            (payload_len,) = struct.unpack_from("<Q", data, pos)
            pos += 8
            payload = data[pos : pos + payload_len]
            if len(payload) != payload_len:
                raise IndexCacheError(f"truncated index cache {path}")
            pos += payload_len
            sections[name] = payload
        except struct.error as exc:
            raise IndexCacheError(f"truncated index cache {path}") from exc
    try:
        meta = json.loads(sections["meta"])
        rows = json.loads(sections["entries"])
    except (KeyError, json.JSONDecodeError) as exc:
        raise IndexCacheError(f"corrupt index cache {path}: {exc}") from exc
    if meta.get("version") != CACHE_FORMAT_VERSION:
        raise IndexCacheError(
            f"unsupported index cache version {meta.get('version')} in {path}"
        )
    entries = []
    for text, cui, pref in rows:
        norm = normalize_term(text)
        if norm.text != text:
            raise IndexCacheError(f"non-normalized entry {text!r} in cache {path}")
        entries.append(IndexEntry(term=norm, cui=ConceptId.parse(cui), preferred=bool(pref)))
    if len(entries) != meta.get("entry_count"):
        raise IndexCacheError(f"entry count mismatch in cache {path}")
    return _index_from_entries(meta["lang"], entries)
