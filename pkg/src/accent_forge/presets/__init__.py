"""Built-in Spanish (SP) and Indian (IN) accent rule sets.

The shipped ``.accentrules`` files are the source of truth at runtime; they
are checked against the digests below when loaded. :func:`reference_ruleset`
builds the same rule sets in code for cross-checking.
"""

from __future__ import annotations

import enum
import hashlib
from functools import lru_cache
from importlib import resources

from ..dsl import parse_ruleset
from ..rules import Context, Mapping, RewriteRule, RuleSet

PRESET_VERSION = "1"
STOP_VOICING_TAG = "stop-voicing"


class AccentId(str, enum.Enum):
    SP = "sp"
    IN = "in"

    @classmethod
    def parse(cls, value: str) -> "AccentId":
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(f"unknown accent {value!r}; expected one of: sp, in") from None


_FILES = {AccentId.SP: "sp.accentrules", AccentId.IN: "in.accentrules"}
_SHA256 = {
    AccentId.SP: "5b6c7e86a13e32110d7c860323576d686c2c8ab6a9a171813a6b535adbae445b",
    AccentId.IN: "ea6b57055b7f6ad91eb5f8dfd9fa5a2ec74b41a692ff021e2b41385c6b1a82ff",
}


class PresetIntegrityError(RuntimeError):
    pass


def _m(src: str, tgt: str, tag: str | None = None) -> Mapping:
    return Mapping(tuple(src.split()), tuple(tgt.split()), tag)


def _pairs(srcs: str, tgts: str) -> tuple[Mapping, ...]:
    return tuple(_m(s, t) for s, t in zip(srcs.split(), tgts.split(), strict=True))


def reference_ruleset(accent: AccentId) -> RuleSet:
    accent = AccentId(accent)
    if accent is AccentId.SP:
        rules = (
            RewriteRule(
                "sp1",
                "Initial Consonant Substitution",
                Context.WORD_INITIAL,
                _pairs("v θ ð z dʒ", "b s d s j")
                + tuple(_m(s, t, STOP_VOICING_TAG) for s, t in (("p", "b"), ("t", "d"), ("k", "g"))),
            ),
            RewriteRule("sp2", "Spanish Rhoticity", Context.POST_VOCALIC, _pairs("ɹ", "ɾ")),
            RewriteRule(
                "sp3",
                "Epenthesis (s-clusters)",
                Context.WORD_INITIAL,
                (_m("s p", "e s p"), _m("s t", "e s t"), _m("s k", "e s k"))
                # voiced clusters only arise from final devoicing feeding a
                # second pass (e.g. /sb/ -> /sp/); covering them keeps the set idempotent
                + (_m("s b", "e s b"), _m("s d", "e s d"), _m("s g", "e s g")),
            ),
            RewriteRule("sp4", "Final Consonant Devoicing", Context.WORD_FINAL, _pairs("b d g z dʒ", "p t k s tʃ")),
            RewriteRule("sp5", "Vowel Simplification", Context.ANYWHERE, _pairs("ɪ ʊ ə ɑ ʌ ɛ ɜ ɔ", "i u a a a e e o")),
            RewriteRule("sp6", "Monophthongization and Schwa", Context.ANYWHERE, _pairs("eɪ oʊ", "e o")),
        )
        return RuleSet("spanish-accented-english", rules, "default@1")
    rules = (
        RewriteRule("in1", "Retroflexion of Stops and R", Context.ANYWHERE, _pairs("t d ɹ", "ʈ ɖ ɽ")),
        RewriteRule("in2", "Dentalization of Fricatives", Context.ANYWHERE, _pairs("θ ð ɫ", "t̪ d̪ l")),
        RewriteRule("in3", "Consonant Substitutions", Context.ANYWHERE, _pairs("v ʒ", "w z")),
        RewriteRule("in4", "Vowel Simplification", Context.ANYWHERE, _pairs("ɪ ʊ æ ʌ ɒ ɛ ɜ ɔ", "i u a ə a e e o")),
        RewriteRule("in5", "Monophthongization and Schwa", Context.ANYWHERE, _pairs("eɪ oʊ ə", "e o a")),
    )
    return RuleSet("indian-accented-english", rules, "default@1")


def preset_text(accent: AccentId) -> bytes:
    return resources.files(__name__).joinpath(_FILES[AccentId(accent)]).read_bytes()


@lru_cache(maxsize=None)
def builtin_ruleset(accent: AccentId | str) -> RuleSet:
    """Load a shipped preset, verifying its digest first."""
    accent = AccentId.parse(accent) if isinstance(accent, str) else accent
    data = preset_text(accent)
    digest = hashlib.sha256(data).hexdigest()
    if digest != _SHA256[accent]:
        raise PresetIntegrityError(f"{_FILES[accent]} digest {digest} does not match the shipped preset")
    return parse_ruleset(data.decode("utf-8"))


def preset_path(accent: AccentId) -> str:
    return str(resources.files(__name__).joinpath(_FILES[AccentId(accent)]))
