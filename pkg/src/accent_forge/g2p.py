"""Dictionary-based grapheme-to-phoneme conversion (CMU/ARPAbet -> IPA)."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .ipa import SECONDARY, STRESS, Segment, Utterance, Word

ARPABET_TO_IPA: Mapping[str, str] = MappingProxyType({
    "AA": "ɑ", "AE": "æ", "AH": "ʌ", "AO": "ɔ", "AW": "aʊ", "AY": "aɪ",
    "B": "b", "CH": "tʃ", "D": "d", "DH": "ð", "EH": "ɛ", "ER": "ɜ",
    "EY": "eɪ", "F": "f", "G": "g", "HH": "h", "IH": "ɪ", "IY": "i",
    "JH": "dʒ", "K": "k", "L": "l", "M": "m", "N": "n", "NG": "ŋ",
    "OW": "oʊ", "OY": "ɔɪ", "P": "p", "R": "ɹ", "S": "s", "SH": "ʃ",
    "T": "t", "TH": "θ", "UH": "ʊ", "UW": "u", "V": "v", "W": "w",
    "Y": "j", "Z": "z", "ZH": "ʒ",
})  # fmt: skip
VOWELS = frozenset({"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW"})

_VARIANT_RE = re.compile(r"^(.+?)\((\d+)\)$")
_TOKEN_RE = re.compile(r"^([A-Z]+)([012]?)$")
_STRIP_RE = re.compile(r"[^\w']|_")


class G2PError(ValueError):
    pass


class MalformedLine(G2PError):
    def __init__(self, line_no: int, line: str) -> None:
        self.line_no = line_no
        super().__init__(f"line {line_no}: malformed lexicon entry {line!r}")


class UnknownArpabetToken(G2PError):
    def __init__(self, token: str, line_no: int | None = None) -> None:
        self.token, self.line_no = token, line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}unknown ARPAbet token {token!r}")


class OovWord(G2PError):
    def __init__(self, word: str) -> None:
        self.word = word
        super().__init__(f"word {word!r} is not in the lexicon")


class OovPolicy(enum.Enum):
    ERROR = "error"
    SKIP = "skip"
    PASSTHROUGH = "passthrough"


def _check_token(token: str, line_no: int | None = None) -> tuple[str, str]:
    m = _TOKEN_RE.match(token)
    if not m or m.group(1) not in ARPABET_TO_IPA:
        raise UnknownArpabetToken(token, line_no)
    base, digit = m.groups()
    if (base in VOWELS) != bool(digit):
        # vowels need a stress digit, consonants take none
        raise UnknownArpabetToken(token, line_no)
    return base, digit


@dataclass(frozen=True)
class Lexicon:
    entries: Mapping[str, tuple[tuple[str, ...], ...]]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.entries

    def lookup(self, word: str) -> tuple[tuple[str, ...], ...] | None:
        return self.entries.get(word.casefold())


def parse_lexicon(lines: Iterable[str]) -> Lexicon:
    entries: dict[str, list[tuple[str, ...]]] = {}
    for line_no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith(";;;"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise MalformedLine(line_no, line)
        head = parts[0]
        m = _VARIANT_RE.match(head)
        if m:
            head = m.group(1)
        for tok in parts[1:]:
            _check_token(tok, line_no)
        entries.setdefault(head.casefold(), []).append(tuple(parts[1:]))
    return Lexicon(MappingProxyType({k: tuple(v) for k, v in entries.items()}))


def load_lexicon(path: str | Path) -> Lexicon:
    with open(path, encoding="utf-8") as f:
        return parse_lexicon(f)


@lru_cache(maxsize=1)
def fixture_lexicon() -> Lexicon:
    text = resources.files("accent_forge.data").joinpath("lexicon.dict").read_text(encoding="utf-8")
    return parse_lexicon(text.splitlines())


def arpabet_to_ipa(tokens: Sequence[str]) -> list[Segment]:
    """Map ARPAbet tokens to IPA segments.

    AH0 becomes schwa and other AH become ʌ. Stress digit 1 or 2 puts a
    primary or secondary stress mark directly before the vowel.
    """
    out: list[Segment] = []
    for tok in tokens:
        base, digit = _check_token(tok)
        if digit == "1":
            out.append(STRESS)
        elif digit == "2":
            out.append(SECONDARY)
        sym = "ə" if tok == "AH0" else ARPABET_TO_IPA[base]
        out.append(Segment.phoneme(sym))
    return out


def _clean(raw: str) -> str:
    return _STRIP_RE.sub("", raw).strip("'")


def normalize_words(text: str) -> list[str]:
    """Whitespace split, punctuation stripped (inner apostrophes kept), case-folded."""
    return [w.casefold() for w in map(_clean, text.split()) if w]


def g2p(text: str, lexicon: Lexicon | None = None, policy: OovPolicy = OovPolicy.ERROR) -> Utterance:
    """Transcribe orthography using the first pronunciation of each word.

    Unknown words raise :class:`OovWord`, are dropped, or pass through as
    OOV marker words depending on ``policy``.
    """
    lex = lexicon if lexicon is not None else fixture_lexicon()
    words: list[Word] = []
    for spelling in map(_clean, text.split()):
        if not spelling:
            continue
        prons = lex.lookup(spelling)
        if prons:
            words.append(Word(tuple(arpabet_to_ipa(prons[0]))))
        elif policy is OovPolicy.ERROR:
            raise OovWord(spelling)
        elif policy is OovPolicy.PASSTHROUGH:
            words.append(Word((), oov=spelling))
    return Utterance(tuple(words))
