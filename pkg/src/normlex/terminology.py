"""Concept lexicon and concept-relation graph loading.

The lexicon file is a UTF-8 TSV with one term per line:

    cui<TAB>lang<TAB>term<TAB>preferred<TAB>sem_group

``preferred`` is ``0`` or ``1``, ``sem_group`` may be empty, and lines
starting with ``#`` (or blank lines) are ignored.  The relations file is a
two-column TSV of concept id pairs, same comment rule.

Loaded structures are immutable and safe for concurrent reads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from pathlib import Path
from typing import Iterable

from .errors import NormlexError

_CUI_RE = re.compile(r"^C[0-9]{7}$")


class LexiconError(NormlexError):
    """Lexicon file unreadable, empty, or too many malformed rows."""


class RelationsError(NormlexError):
    """Relations file unreadable."""


class EmptyCandidates(NormlexError):
    """smallest_cui called with no candidates."""


@total_ordering
@dataclass(frozen=True, slots=True)
class ConceptId:
    """A concept identifier: ``C`` followed by exactly 7 decimal digits.

    Ordering is numeric on the digit suffix, so it is stable under the
    zero-padding of the raw form.
    """

    raw: str
    numeric_value: int

    def __post_init__(self) -> None:
        if not _CUI_RE.match(self.raw):
            raise ValueError(f"bad cui: {self.raw!r}")
        if int(self.raw[1:]) != self.numeric_value:
            raise ValueError(f"cui digits do not match numeric value: {self.raw!r}")

    @classmethod
    def parse(cls, raw: str) -> "ConceptId":
        if not _CUI_RE.match(raw):
            raise ValueError(f"bad cui: {raw!r}")
        return cls(raw=raw, numeric_value=int(raw[1:]))

    @classmethod
    def from_int(cls, value: int) -> "ConceptId":
        if not 0 <= value <= 9_999_999:
            raise ValueError(f"cui numeric value out of range: {value}")
        return cls(raw=f"C{value:07d}", numeric_value=value)

    def __lt__(self, other: "ConceptId") -> bool:
        return self.numeric_value < other.numeric_value

    def __str__(self) -> str:
        return self.raw


@dataclass(frozen=True, slots=True)
class TermRecord:
    """One concept-name row of the lexicon."""

    cui: ConceptId
    lang: str
    term: str
    preferred: bool
    sem_group: str


@dataclass(frozen=True)
class ConceptEntry:
    """All lexicon knowledge about a single concept."""

    cui: ConceptId
    records: tuple[TermRecord, ...]
    sem_groups: frozenset[str]

    def terms(self, lang: str | None = None) -> tuple[str, ...]:
        if lang is None:
            return tuple(r.term for r in self.records)
        return tuple(r.term for r in self.records if r.lang == lang)

    def preferred_terms(self, lang: str) -> tuple[str, ...]:
        return tuple(r.term for r in self.records if r.lang == lang and r.preferred)


@dataclass(frozen=True)
class Lexicon:
    """Immutable multilingual concept lexicon.

    ``records`` is sorted by (cui, lang, term) so iteration order is a pure
    function of the file content.
    """

    records: tuple[TermRecord, ...]
    by_cui: dict[ConceptId, ConceptEntry]
    languages: frozenset[str]

    def __len__(self) -> int:
        return len(self.records)

    def concept(self, cui: ConceptId) -> ConceptEntry:
        return self.by_cui[cui]


@dataclass(frozen=True, slots=True)
class MalformedRow:
    """A rejected lexicon/relations row, kept for reporting."""

    line_no: int
    reason: str


@dataclass(frozen=True)
class RelationGraph:
    """Undirected concept-relation edges, stored canonically.

    Each edge is a pair with the numerically smaller concept id first.
    """

    edges: frozenset[tuple[ConceptId, ConceptId]]

    @classmethod
    def empty(cls) -> "RelationGraph":
        return cls(edges=frozenset())

    def connected(self, a: ConceptId, b: ConceptId) -> bool:
        if a == b:
            return False
        key = (a, b) if a.numeric_value < b.numeric_value else (b, a)
        return key in self.edges

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True, slots=True)
class RelationLoadReport:
    """Counts of rows dropped while loading a relations file."""

    kept: int = 0
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0
    dropped_unknown: int = 0
    dropped_malformed: int = 0


# At most this fraction of data rows may be malformed before the whole
# load is considered failed.
MALFORMED_ROW_TOLERANCE = 0.01


def _parse_lexicon_row(
    line_no: int, line: str, expected_langs: frozenset[str]
) -> TermRecord | MalformedRow:
    fields = line.split("\t")
    if len(fields) != 5:
        return MalformedRow(line_no, f"expected 5 fields, got {len(fields)}")
    raw_cui, lang, term, preferred, sem_group = fields
    if not _CUI_RE.match(raw_cui):
        return MalformedRow(line_no, "bad cui")
    if lang not in expected_langs:
        return MalformedRow(line_no, f"unknown language {lang!r}")
    term = term.strip()
    if not term:
        return MalformedRow(line_no, "empty term")
    if preferred not in ("0", "1"):
        return MalformedRow(line_no, "bad preferred flag")
    return TermRecord(
        cui=ConceptId.parse(raw_cui),
        lang=lang,
        term=term,
        preferred=preferred == "1",
        sem_group=sem_group.strip(),
    )


def build_lexicon(records: Iterable[TermRecord]) -> Lexicon:
    """Assemble a Lexicon from records (deduplicated, sorted)."""
    unique = sorted(
        set(records), key=lambda r: (r.cui.numeric_value, r.lang, r.term, r.sem_group, r.preferred)
    )
    grouped: dict[ConceptId, list[TermRecord]] = {}
    for rec in unique:
        grouped.setdefault(rec.cui, []).append(rec)
    by_cui = {
        cui: ConceptEntry(
            cui=cui,
            records=tuple(recs),
            sem_groups=frozenset(r.sem_group for r in recs if r.sem_group),
        )
        for cui, recs in grouped.items()
    }
    return Lexicon(
        records=tuple(unique),
        by_cui=by_cui,
        languages=frozenset(r.lang for r in unique),
    )


def load_lexicon(
    path: str | Path, expected_langs: Iterable[str]
) -> tuple[Lexicon, list[MalformedRow]]:
    """Load a lexicon TSV file.

    Returns the lexicon together with the rejected rows.  Raises
    LexiconError when the file is unreadable, contains no data rows, or
    when more than 1% of its data rows are malformed.
    """
    langs = frozenset(expected_langs)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LexiconError(f"cannot read lexicon {path}: {exc}") from exc

    records: list[TermRecord] = []
    malformed: list[MalformedRow] = []
    total = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        total += 1
        parsed = _parse_lexicon_row(line_no, line, langs)
        if isinstance(parsed, MalformedRow):
            malformed.append(parsed)
        else:
            records.append(parsed)

    if total == 0:
        raise LexiconError("empty lexicon")
    if len(malformed) > MALFORMED_ROW_TOLERANCE * total:
        raise LexiconError(
            f"{len(malformed)} of {total} rows malformed "
            f"(first: line {malformed[0].line_no}, {malformed[0].reason})"
        )
    return build_lexicon(records), malformed


def load_relations(
    path: str | Path, lexicon: Lexicon
) -> tuple[RelationGraph, RelationLoadReport]:
    """Load a relations TSV file, keeping only edges between known concepts.

    Self-loops, duplicates, rows naming unknown concepts, and rows that do
    not parse are dropped; the report carries the counts.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise RelationsError(f"cannot read relations {path}: {exc}") from exc

    edges: set[tuple[ConceptId, ConceptId]] = set()
    self_loops = duplicates = unknown = bad = 0
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not all(_CUI_RE.match(f) for f in fields):
            bad += 1
            continue
        a, b = ConceptId.parse(fields[0]), ConceptId.parse(fields[1])
        if a == b:
            self_loops += 1
            continue
        if a not in lexicon.by_cui or b not in lexicon.by_cui:
            unknown += 1
            continue
        key = (a, b) if a.numeric_value < b.numeric_value else (b, a)
        if key in edges:
            duplicates += 1
            continue
        edges.add(key)

    report = RelationLoadReport(
        kept=len(edges),
        dropped_self_loops=self_loops,
        dropped_duplicates=duplicates,
        dropped_unknown=unknown,
        dropped_malformed=bad,
    )
    return RelationGraph(edges=frozenset(edges)), report


def smallest_cui(candidates: Iterable[ConceptId]) -> ConceptId:
    """Return the candidate with the smallest numeric id."""
    best: ConceptId | None = None
    for cui in candidates:
        if best is None or cui.numeric_value < best.numeric_value:
            best = cui
    if best is None:
        raise EmptyCandidates("no candidates to choose from")
    return best
