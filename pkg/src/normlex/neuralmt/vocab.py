"""Character vocabularies with reserved special symbols."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

PAD = 0
BOS = 1
EOS = 2
UNK = 3
N_SPECIALS = 4


@dataclass(frozen=True)
class CharVocab:
    """Dense char->id map; ids 0..3 are PAD/BOS/EOS/UNK.

    All stored characters are lowercase; callers lowercase text before
    encoding.
    """

    chars: tuple[str, ...]
    char_to_id: dict[str, int]

    @classmethod
    def build(cls, texts: Iterable[str]) -> "CharVocab":
        seen = {ch for text in texts for ch in text.lower()}
        chars = tuple(sorted(seen))
        return cls.from_chars(chars)

    @classmethod
    def from_chars(cls, chars: Iterable[str]) -> "CharVocab":
        chars = tuple(chars)
        if any(ch != ch.lower() for ch in chars):
            raise ValueError("vocab characters must be lowercase")
        if len(set(chars)) != len(chars):
            raise ValueError("duplicate characters in vocab")
        mapping = {ch: i + N_SPECIALS for i, ch in enumerate(chars)}
        return cls(chars=chars, char_to_id=mapping)

    def __len__(self) -> int:
        return len(self.chars) + N_SPECIALS

    def encode(self, text: str) -> list[int]:
        """Map lowercased characters to ids; unseen characters become UNK."""
        return [self.char_to_id.get(ch, UNK) for ch in text.lower()]

    def decode_id(self, idx: int) -> str:
        """Character for a non-special id; specials decode to ''."""
        if idx < N_SPECIALS:
            return ""
        return self.chars[idx - N_SPECIALS]
