from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accent_forge.ipa import (
    BOUNDARY,
    SEGMENT_SEPARATOR,
    STRESS,
    EmptyInput,
    IpaError,
    InventoryFormatError,
    Segment,
    SegmentKind,
    UnknownSymbol,
    Utterance,
    Word,
    default_inventory,
    parse_inventory,
    render,
    tokenize,
)

from helpers import SYMBOLS


def test_default_inventory_identity():
    inv = default_inventory()
    assert inv.ref == "default@1"
    assert len(inv) == 52
    for sym in ("tʃ", "dʒ", "eɪ", "t̪", "d̪", "ʈ", "ɖ", "ɽ", "ɾ"):
        assert sym in inv
    assert inv.is_vowel("oʊ") and not inv.is_vowel("ɹ")
    assert inv.has_tag("tʃ", "affricate")


@pytest.mark.parametrize(
    "text,phonemes",
    [
        ("θɹi", ["θ", "ɹ", "i"]),
        ("tʃɪp", ["tʃ", "ɪ", "p"]),
        ("t͡ʃɪp", ["tʃ", "ɪ", "p"]),
        ("ɡeɪt", ["g", "eɪ", "t"]),
        ("t̪ɽi", ["t̪", "ɽ", "i"]),
        ("/stɔnz./", ["s", "t", "ɔ", "n", "z"]),
        ("[bɪg]", ["b", "ɪ", "g"]),
    ],
)
def test_tokenize_longest_match(text, phonemes):
    assert list(tokenize(text).phonemes) == phonemes


def test_tokenize_marks_and_words():
    u = tokenize("ˈkeɪt ˌfaʊ.nd")
    assert len(u.words) == 2
    assert u.words[0].segments[0] is STRESS
    assert u.words[1].segments[0].kind is SegmentKind.SECONDARY_STRESS
    assert BOUNDARY in u.words[1].segments
    assert u.phonemes == ("k", "eɪ", "t", "f", "aʊ", "n", "d")


def test_tokenize_nfd_input_is_normalized():
    import unicodedata

    assert tokenize(unicodedata.normalize("NFD", "t̪a")).phonemes == ("t̪", "a")


def test_unknown_symbol_reports_position_and_codepoint():
    with pytest.raises(UnknownSymbol) as info:
        tokenize("θɹx")
    assert info.value.position == 2
    assert info.value.codepoint == "x"


def test_stranded_combining_mark_is_unknown():
    # ̪ on a vowel: "a" matches but the diacritic cannot be left over
    with pytest.raises(UnknownSymbol) as info:
        tokenize("a̪")
    assert info.value.position == 1


@pytest.mark.parametrize("text", ["", "   ", "//", "[ ]", "..."])
def test_empty_input(text):
    with pytest.raises(EmptyInput):
        tokenize(text)


def test_word_of_only_marks_rejected():
    with pytest.raises(IpaError):
        tokenize("ˈ θ")


def test_render_inserts_separator_only_where_needed():
    assert render(Word.of("t", "ʃ")) == "t" + SEGMENT_SEPARATOR + "ʃ"
    assert render(Word.of("tʃ")) == "tʃ"
    assert render(Word.of("e", "ɪ")) == "e" + SEGMENT_SEPARATOR + "ɪ"
    assert render(Word.of("θ", "ɹ", "i")) == "θɹi"
    assert tokenize(render(Word.of("t", "ʃ"))).phonemes == ("t", "ʃ")


def test_word_invariants():
    with pytest.raises(ValueError):
        Word((STRESS,))
    with pytest.raises(ValueError):
        Word((Segment.phoneme("a"), BOUNDARY))
    with pytest.raises(ValueError):
        Word((Segment.phoneme("a"),), oov="x")
    with pytest.raises(ValueError):
        Segment(SegmentKind.PRIMARY_STRESS, "ˈ")


def test_oov_round_trip():
    u = Utterance((Word.of("a"), Word((), oov="zyx")))
    assert render(u) == "a ⟨zyx⟩"
    assert tokenize(render(u)) == u
    assert u.phoneme_count == 1


def test_utterance_durations_checked():
    w = Word.of("a", "b")
    assert Utterance((w,), (0.1, 0.2)).durations == (0.1, 0.2)
    with pytest.raises(ValueError):
        Utterance((w,), (0.1,))
    with pytest.raises(ValueError):
        Utterance((w,), (0.1, -0.2))


def test_parse_inventory_errors():
    with pytest.raises(InventoryFormatError):
        parse_inventory("a\tvowel\na\tvowel\n")
    with pytest.raises(InventoryFormatError):
        parse_inventory("a\n")
    with pytest.raises(InventoryFormatError):
        parse_inventory("a\tvoiced\n")
    inv = parse_inventory("# inventory: tiny@3\na\tvowel\nb\tconsonant\nab\tconsonant\n")
    assert inv.ref == "tiny@3"
    assert tokenize("aab", inv).phonemes == ("a", "ab")


_marks = st.sampled_from([STRESS, BOUNDARY, Segment(SegmentKind.SECONDARY_STRESS)])
_phon = st.sampled_from(SYMBOLS).map(Segment.phoneme)


@st.composite
def words(draw):
    segs = draw(st.lists(st.one_of(_phon, _phon, _marks), min_size=1, max_size=10))
    segs.append(draw(_phon))
    return Word(tuple(segs))


@settings(max_examples=300, deadline=None)
@given(st.lists(words(), min_size=1, max_size=6))
def test_round_trip_property(ws):
    u = Utterance(tuple(ws))
    assert tokenize(render(u)) == u


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=20))
def test_tokenize_never_crashes(text):
    try:
        tokenize(text)
    except IpaError:
        pass
