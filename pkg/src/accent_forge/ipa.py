"""Phoneme inventory, utterance model, and IPA tokenize/render.

Tokenization is greedy longest-match against a closed inventory, so
affricates (tʃ), diphthongs (eɪ) and diacritic-bearing symbols (t̪) come
out as single segments.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

PRIMARY_STRESS = "ˈ"
SECONDARY_STRESS = "ˌ"
SYLLABLE_BOUNDARY = "."
OOV_OPEN, OOV_CLOSE = "⟨", "⟩"
# Emitted by render() between two phonemes that would otherwise fuse under
# longest match (e.g. [t, ʃ] vs the affricate tʃ); skipped by tokenize().
SEGMENT_SEPARATOR = "\u200c"

# Spelling variants folded onto canonical inventory symbols after NFC.
_ALIASES = {
    "ɡ": "g",
    "t͡ʃ": "tʃ",
    "d͡ʒ": "dʒ",
    "t͜ʃ": "tʃ",
    "d͜ʒ": "dʒ",
}
_STRIP_DELIMITERS = "/[]"
_WORD_FINAL_PUNCT = ".,;!?"

KNOWN_TAGS = frozenset(
    {"vowel", "consonant", "diphthong", "voiced", "voiceless", "stop", "fricative", "affricate"}
)


class IpaError(ValueError):
    pass


class EmptyInput(IpaError):
    def __init__(self) -> None:
        super().__init__("empty IPA input")


class UnknownSymbol(IpaError):
    def __init__(self, position: int, codepoint: str, text: str = "") -> None:
        self.position = position
        self.codepoint = codepoint
        name = unicodedata.name(codepoint, "UNKNOWN") if len(codepoint) == 1 else codepoint
        super().__init__(
            f"unknown symbol {codepoint!r} (U+{ord(codepoint[0]):04X} {name}) at position {position}"
            + (f" in {text!r}" if text else "")
        )


class InventoryFormatError(IpaError):
    pass


class SegmentKind(enum.Enum):
    PHONEME = "phoneme"
    PRIMARY_STRESS = "primary_stress"
    SECONDARY_STRESS = "secondary_stress"
    SYLLABLE_BOUNDARY = "syllable_boundary"


_MARK_TEXT = {
    SegmentKind.PRIMARY_STRESS: PRIMARY_STRESS,
    SegmentKind.SECONDARY_STRESS: SECONDARY_STRESS,
    SegmentKind.SYLLABLE_BOUNDARY: SYLLABLE_BOUNDARY,
}


@dataclass(frozen=True, slots=True)
class Segment:
    kind: SegmentKind
    symbol: str | None = None

    def __post_init__(self) -> None:
        if self.kind is SegmentKind.PHONEME:
            if not self.symbol:
                raise ValueError("phoneme segment needs a symbol")
        elif self.symbol is not None:
            raise ValueError(f"{self.kind.name} segment carries no symbol")

    @classmethod
    def phoneme(cls, symbol: str) -> "Segment":
        seg = _PHONEME_SEGMENTS.get(symbol)
        if seg is None:
            seg = _PHONEME_SEGMENTS[symbol] = cls(SegmentKind.PHONEME, symbol)
        return seg

    @property
    def is_phoneme(self) -> bool:
        return self.kind is SegmentKind.PHONEME

    def text(self) -> str:
        return self.symbol if self.kind is SegmentKind.PHONEME else _MARK_TEXT[self.kind]

    def __repr__(self) -> str:
        return f"Segment({self.text()!r})"


_PHONEME_SEGMENTS: dict[str, Segment] = {}
STRESS = Segment(SegmentKind.PRIMARY_STRESS)
SECONDARY = Segment(SegmentKind.SECONDARY_STRESS)
BOUNDARY = Segment(SegmentKind.SYLLABLE_BOUNDARY)


@dataclass(frozen=True, slots=True)
class Word:
    """A whitespace-delimited word.

    ``oov`` marks a pass-through word from G2P: it holds the original
    spelling, has no segments, and is never rewritten.
    """

    segments: tuple[Segment, ...]
    oov: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.oov is not None:
            if self.segments:
                raise ValueError("OOV word carries no segments")
            if not self.oov or any(c.isspace() or c in OOV_OPEN + OOV_CLOSE for c in self.oov):
                raise ValueError(f"invalid OOV spelling {self.oov!r}")
            return
        if not any(s.kind is SegmentKind.PHONEME for s in self.segments):
            raise ValueError("word must contain at least one phoneme")
        if self.segments[-1].kind is SegmentKind.SYLLABLE_BOUNDARY:
            # a trailing '.' would be read back as punctuation
            raise ValueError("word cannot end in a syllable boundary")

    @classmethod
    def of(cls, *symbols: str) -> "Word":
        return cls(tuple(Segment.phoneme(s) for s in symbols))

    @property
    def phonemes(self) -> tuple[str, ...]:
        return tuple(s.symbol for s in self.segments if s.kind is SegmentKind.PHONEME)


@dataclass(frozen=True, slots=True)
class Utterance:
    words: tuple[Word, ...]
    durations: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "words", tuple(self.words))
        if self.durations is not None:
            durs = tuple(float(d) for d in self.durations)
            object.__setattr__(self, "durations", durs)
            n = self.phoneme_count
            if len(durs) != n:
                raise ValueError(f"{len(durs)} durations for {n} phonemes")
            if any(not d >= 0 for d in durs):
                raise ValueError("durations must be non-negative")

    @property
    def phonemes(self) -> tuple[str, ...]:
        return tuple(p for w in self.words for p in w.phonemes)

    @property
    def phoneme_count(self) -> int:
        return sum(len(w.phonemes) for w in self.words)

    def with_durations(self, durations: Sequence[float] | None) -> "Utterance":
        return Utterance(self.words, None if durations is None else tuple(durations))


@dataclass(frozen=True)
class Inventory:
    """Closed phoneme alphabet with class tags."""

    symbols: tuple[str, ...]
    tags: dict[str, frozenset[str]] = field(compare=False, hash=False)
    name: str = "default"
    version: str = "1"

    def __post_init__(self) -> None:
        symbols = tuple(unicodedata.normalize("NFC", s) for s in self.symbols)
        if len(set(symbols)) != len(symbols):
            raise InventoryFormatError("duplicate symbol in inventory")
        for s in symbols:
            tags = self.tags.get(s)
            if not tags or not ({"vowel", "consonant"} & tags):
                raise InventoryFormatError(f"{s!r} must be tagged vowel or consonant")
            if s[0] in PRIMARY_STRESS + SECONDARY_STRESS + SYLLABLE_BOUNDARY or unicodedata.combining(s[0]):
                raise InventoryFormatError(f"{s!r} cannot start with a mark")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_set", frozenset(symbols))
        object.__setattr__(self, "max_len", max((len(s) for s in symbols), default=0))

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._set  # type: ignore[attr-defined]

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __hash__(self) -> int:
        return hash((self.symbols, self.name, self.version))

    @property
    def ref(self) -> str:
        return f"{self.name}@{self.version}"

    def has_tag(self, symbol: str, tag: str) -> bool:
        return tag in self.tags.get(symbol, ())

    def is_vowel(self, symbol: str) -> bool:
        return "vowel" in self.tags.get(symbol, ())

    def longest_match(self, text: str, start: int) -> str | None:
        for n in range(min(self.max_len, len(text) - start), 0, -1):
            cand = text[start : start + n]
            if cand in self._set:  # type: ignore[attr-defined]
                return cand
        return None


def parse_inventory(text: str, name: str | None = None, version: str | None = None) -> Inventory:
    """Parse the ``symbol<TAB>tag,tag`` inventory format.

    A ``# inventory: name@version`` comment sets the identity unless
    ``name``/``version`` are passed explicitly.
    """
    symbols: list[str] = []
    tags: dict[str, frozenset[str]] = {}
    file_name, file_version = "default", "1"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("inventory:"):
                ref = body.split(":", 1)[1].strip()
                if "@" not in ref:
                    raise InventoryFormatError(f"line {lineno}: expected name@version")
                file_name, file_version = ref.rsplit("@", 1)
            continue
        parts = raw.rstrip("\r\n").split("\t")
        if len(parts) != 2 or not parts[0]:
            raise InventoryFormatError(f"line {lineno}: expected symbol<TAB>tags")
        sym = unicodedata.normalize("NFC", parts[0].strip())
        tagset = frozenset(t.strip() for t in parts[1].split(",") if t.strip())
        if sym in tags:
            raise InventoryFormatError(f"line {lineno}: duplicate symbol {sym!r}")
        symbols.append(sym)
        tags[sym] = tagset
    return Inventory(tuple(symbols), tags, name or file_name, version or file_version)


def load_inventory(path: str | Path) -> Inventory:
    return parse_inventory(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def default_inventory() -> Inventory:
    text = resources.files("accent_forge.data").joinpath("inventory.tsv").read_text(encoding="utf-8")
    return parse_inventory(text)


def normalize(text: str) -> str:
    text = unicodedata.normalize("NFC", text)
    for alias, canon in _ALIASES.items():
        if alias in text:
            text = text.replace(alias, canon)
    return text


def _tokenize_word(token: str, offset: int, inv: Inventory, source: str) -> Word | None:
    if len(token) > 2 and token[0] == OOV_OPEN and token[-1] == OOV_CLOSE:
        return Word((), oov=token[1:-1])
    end = len(token)
    while end and token[end - 1] in _WORD_FINAL_PUNCT:
        end -= 1
    segments: list[Segment] = []
    i = 0
    while i < end:
        ch = token[i]
        if ch == PRIMARY_STRESS:
            segments.append(STRESS)
            i += 1
        elif ch == SECONDARY_STRESS:
            segments.append(SECONDARY)
            i += 1
        elif ch == SYLLABLE_BOUNDARY:
            segments.append(BOUNDARY)
            i += 1
        elif ch == SEGMENT_SEPARATOR:
            i += 1
        else:
            match = inv.longest_match(token[:end], i)
            nxt = i + len(match) if match else i
            # a match may not strand a combining mark belonging to its last letter
            if match is None or (nxt < end and unicodedata.combining(token[nxt])):
                bad = token[nxt] if match else ch
                raise UnknownSymbol(offset + (nxt if match else i), bad, source)
            segments.append(Segment.phoneme(match))
            i = nxt
    if not segments:
        return None
    if not any(s.kind is SegmentKind.PHONEME for s in segments):
        raise IpaError(f"word {token!r} at position {offset} has no phonemes")
    return Word(tuple(segments))


def tokenize(text: str, inventory: Inventory | None = None) -> Utterance:
    """Segment an IPA string into an :class:`Utterance`.

    Enclosing ``/.../`` or ``[...]`` delimiters and word-final punctuation
    are dropped. Raises :class:`UnknownSymbol` naming the offending
    position and code point.
    """
    inv = inventory or default_inventory()
    text = normalize(text).strip().strip(_STRIP_DELIMITERS).strip()
    if not text:
        raise EmptyInput()
    words: list[Word] = []
    pos = 0
    for token in text.split():
        pos = text.index(token, pos)
        word = _tokenize_word(token, pos, inv, text)
        pos += len(token)
        if word is not None:
            words.append(word)
    if not words:
        raise EmptyInput()
    return Utterance(tuple(words))


def _render_word(word: Word, inv: Inventory) -> str:
    if word.oov is not None:
        return OOV_OPEN + word.oov + OOV_CLOSE
    pieces = [s.text() for s in word.segments]
    out: list[str] = []
    for k, seg in enumerate(word.segments):
        out.append(pieces[k])
        if not seg.is_phoneme or k + 1 == len(pieces) or not word.segments[k + 1].is_phoneme:
            continue
        look = pieces[k]
        j = k + 1
        while j < len(pieces) and len(look) < len(pieces[k]) + inv.max_len:
            look += pieces[j]
            j += 1
        if inv.longest_match(look, 0) != pieces[k]:
            out.append(SEGMENT_SEPARATOR)
    return "".join(out)


def render(u: Utterance | Word, inventory: Inventory | None = None) -> str:
    """Inverse of :func:`tokenize`; words are joined by single spaces."""
    inv = inventory or default_inventory()
    if isinstance(u, Word):
        return _render_word(u, inv)
    return " ".join(_render_word(w, inv) for w in u.words)


def phoneme_sequence(words: Iterable[Word]) -> list[str]:
    return [p for w in words for p in w.phonemes]
