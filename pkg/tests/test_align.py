from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accent_forge.align import (
    AlignmentError,
    Borrow,
    DegenerateTrace,
    InsertionPolicy,
    align_durations,
    alignment_from_trace,
    project_durations,
    total_preserved,
)
from accent_forge.ipa import tokenize
from accent_forge.presets import builtin_ruleset
from accent_forge.rules import apply_ruleset
from accent_forge.trace import Delete, Insert, Keep, LengthMismatch, Substitute, TransformTrace

from helpers import exact_sum, random_durations, random_trace

F = Fraction


def test_epenthesis_borrows_from_following():
    _, t = apply_ruleset(builtin_ruleset("sp"), tokenize("st"))
    assert align_durations(t, [0.2, 0.4]) == [0.1, 0.1, 0.4]


@pytest.mark.parametrize(
    "borrow,expected",
    [
        (Borrow.FOLLOWING, [0.2, 0.1, 0.1]),
        (Borrow.PRECEDING, [0.1, 0.1, 0.2]),
        (Borrow.SPLIT, [0.15, 0.1, 0.15]),
    ],
)
def test_insert_policies(borrow, expected):
    t = TransformTrace(("a", "b"), (Keep(0, 0), Insert(1, "r", "e"), Keep(1, 2)))
    got = align_durations(t, [0.2, 0.2], InsertionPolicy(borrow))
    assert got == pytest.approx(expected, abs=1e-15)
    assert sum(got) == pytest.approx(0.4)


def test_edge_insert_falls_back_to_existing_side():
    t = TransformTrace(("a",), (Keep(0, 0), Insert(1, "r", "e")))
    assert align_durations(t, [0.3]) == [0.15, 0.15]


def test_n_to_m_substitution_spreads_evenly():
    t = TransformTrace(("a", "b"), (Substitute(0, 2, 0, 3, "r", ("x", "y", "z")),))
    amap = alignment_from_trace(t)
    amap.validate()
    assert amap.supports[0] == ((0, F(1, 3)), (1, F(1, 3)))
    assert align_durations(t, [0.3, 0.6]) == pytest.approx([0.3, 0.3, 0.3])


def test_delete_goes_to_nearest_survivor():
    t = TransformTrace(("a", "b", "c"), (Keep(0, 0), Delete(1, "r"), Keep(2, 1)))
    assert align_durations(t, [0.1, 0.2, 0.3]) == pytest.approx([0.1, 0.5])
    assert align_durations(t, [0.1, 0.2, 0.3], InsertionPolicy(Borrow.PRECEDING)) == pytest.approx([0.3, 0.3])


def test_degenerate_trace():
    with pytest.raises(DegenerateTrace):
        alignment_from_trace(TransformTrace(("a",), (Delete(0, "r"), Insert(0, "r", "e"))))


def test_policy_validation():
    for f in (0, 1, F(3, 2), -0.5):
        with pytest.raises(AlignmentError):
            InsertionPolicy(fraction=f)


def test_length_and_sign_checks():
    amap = alignment_from_trace(TransformTrace.identity("ab"))
    with pytest.raises(LengthMismatch):
        project_durations([0.1], amap)
    with pytest.raises(AlignmentError):
        project_durations([0.1, -0.1], amap)


def test_pairs_view():
    t = TransformTrace(("a",), (Keep(0, 0), Insert(1, "r", "e")))
    assert alignment_from_trace(t).pairs == [(0, 0, F(1, 2)), (1, 0, F(1, 2))]


def test_shares_sum_to_one_for_random_traces():
    rng = random.Random(1)
    for _ in range(2000):
        t = random_trace(rng)
        t.validate()
        alignment_from_trace(t, InsertionPolicy(rng.choice(list(Borrow)), F(rng.randint(1, 9), 10))).validate()


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(list(Borrow)))
def test_conservation_property(seed, borrow):
    rng = random.Random(seed)
    t = random_trace(rng)
    durs = random_durations(rng, t.source_length)
    out = align_durations(t, durs, InsertionPolicy(borrow))
    assert len(out) == t.output_length
    assert abs(exact_sum(out) - exact_sum(durs)) <= exact_sum(durs) * F(1, 10**9)
    assert total_preserved(durs, out)
