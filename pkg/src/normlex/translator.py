"""Translation interface used by the third candidate-search level.

A translator returns None when it cannot translate; it never falls back to
echoing the input, because that would make the translate-then-lookup level
silently duplicate the untranslated cross-lingual level.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

from .index import normalize_term
from .neuralmt import TranslationModel, decode_greedy


class Translator(Protocol):
    def translate(self, term: str) -> str | None:
        """Translation of ``term``, or None when unavailable."""


@dataclass(frozen=True)
class DictionaryTranslator:
    """Table-based translator over normalized source terms."""

    mapping: dict[str, str]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "DictionaryTranslator":
        mapping: dict[str, str] = {}
        for source, target in pairs:
            key = normalize_term(source).text
            if key and key not in mapping:  # first entry wins
                mapping[key] = target
        return cls(mapping=mapping)

    @classmethod
    def from_tsv(cls, path: str | Path) -> "DictionaryTranslator":
        pairs = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValueError(f"dictionary rows need 2 fields, got {len(fields)}")
            pairs.append((fields[0], fields[1]))
        return cls.from_pairs(pairs)

    def translate(self, term: str) -> str | None:
        key = normalize_term(term).text
        if not key:
            return None
        return self.mapping.get(key)


@dataclass(frozen=True)
class NeuralTranslator:
    """Greedy decoding through a trained translation model."""

    model: TranslationModel

    def translate(self, term: str) -> str | None:
        if not term.lower():
            return None
        out = decode_greedy(self.model, term)
        return out or None


def translate_dictionary(translator: DictionaryTranslator, term: str) -> str | None:
    return translator.translate(term)


def translate_neural(model: TranslationModel, term: str) -> str | None:
    return NeuralTranslator(model).translate(term)
