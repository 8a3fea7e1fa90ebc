"""Project per-phoneme durations from a source sequence onto its rewrite.

Shares are kept as exact fractions: every source phoneme's time is split
among the targets it supports, and those shares sum to exactly one, so the
projection conserves total duration.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .trace import Delete, Insert, Keep, LengthMismatch, Substitute, TransformTrace


class AlignmentError(ValueError):
    pass


class DegenerateTrace(AlignmentError):
    pass


class Borrow(enum.Enum):
    FOLLOWING = "following"
    PRECEDING = "preceding"
    SPLIT = "split"


@dataclass(frozen=True)
class InsertionPolicy:
    """How inserted (and deleted) phonemes get their time.

    An inserted phoneme takes ``fraction`` of a neighbour's time: the next
    non-inserted target (FOLLOWING), the previous one (PRECEDING), or
    ``fraction / 2`` from each (SPLIT). Falls back to whichever side
    exists. A deleted phoneme's time goes whole to the nearest surviving
    target on the same side (SPLIT halves it).
    """

    borrow: Borrow = Borrow.FOLLOWING
    fraction: Fraction = Fraction(1, 2)

    def __post_init__(self) -> None:
        f = Fraction(self.fraction)
        if not 0 < f < 1:
            raise AlignmentError(f"borrow fraction must be in (0, 1), got {self.fraction}")
        object.__setattr__(self, "fraction", f)


DEFAULT_POLICY = InsertionPolicy()


@dataclass(frozen=True)
class AlignmentMap:
    """``supports[t]`` lists (source index, share) pairs feeding target ``t``."""

    source_length: int
    supports: tuple[tuple[tuple[int, Fraction], ...], ...]

    @property
    def target_length(self) -> int:
        return len(self.supports)

    @property
    def pairs(self) -> list[tuple[int, int | None, Fraction]]:
        """Flat (target, source, share) rows; unsupported targets get (t, None, 0)."""
        rows: list[tuple[int, int | None, Fraction]] = []
        for t, sup in enumerate(self.supports):
            if not sup:
                rows.append((t, None, Fraction(0)))
            rows.extend((t, s, w) for s, w in sup)
        return rows

    def source_totals(self) -> list[Fraction]:
        totals = [Fraction(0)] * self.source_length
        for sup in self.supports:
            for s, w in sup:
                totals[s] += w
        return totals

    def validate(self) -> None:
        for t, sup in enumerate(self.supports):
            for s, w in sup:
                if not 0 <= s < self.source_length or not 0 < w <= 1:
                    raise AlignmentError(f"target {t}: bad support ({s}, {w})")
        for s, total in enumerate(self.source_totals()):
            if total != 1:
                raise AlignmentError(f"source {s} shares sum to {total}, not 1")


def _nearest(survivors: list[int], pos: int, side: Borrow) -> list[int]:
    """Surviving targets adjacent to gap position ``pos`` on the requested side."""
    k = bisect.bisect_left(survivors, pos)
    after = survivors[k] if k < len(survivors) else None
    before = survivors[k - 1] if k > 0 else None
    if side is Borrow.SPLIT and after is not None and before is not None:
        return [before, after]
    if side is Borrow.PRECEDING:
        return [before] if before is not None else [after]
    return [after] if after is not None else [before]


def alignment_from_trace(trace: TransformTrace, policy: InsertionPolicy = DEFAULT_POLICY) -> AlignmentMap:
    n_out = trace.output_length
    supports: list[dict[int, Fraction]] = [dict() for _ in range(n_out)]
    inserted: list[int] = []
    deleted: list[tuple[int, int]] = []  # (source, output position of the gap)
    cursor = 0
    for op in trace.ops:
        if isinstance(op, Keep):
            supports[op.out][op.src] = Fraction(1)
            cursor = op.out + 1
        elif isinstance(op, Substitute):
            m = op.out_stop - op.out_start
            for s in range(op.src_start, op.src_stop):
                for t in range(op.out_start, op.out_stop):
                    supports[t][s] = Fraction(1, m)
            cursor = op.out_stop
        elif isinstance(op, Insert):
            inserted.append(op.out)
            cursor = op.out + 1
        else:
            deleted.append((op.src, cursor))

    is_inserted = set(inserted)
    survivors = [t for t in range(n_out) if t not in is_inserted]
    if deleted and not survivors:
        raise DegenerateTrace("every source phoneme was deleted; no target can absorb its duration")

    for src, gap in deleted:
        homes = _nearest(survivors, gap, policy.borrow)
        share = Fraction(1, len(homes))
        for t in homes:
            supports[t][src] = supports[t].get(src, Fraction(0)) + share

    f = policy.fraction
    for t in inserted:
        if not survivors:
            break
        # gap position t sits between survivors < t and survivors > t
        homes = _nearest(survivors, t, policy.borrow)
        take = f / len(homes)
        for h in homes:
            for s, w in list(supports[h].items()):
                moved = w * take
                supports[h][s] = w - moved
                supports[t][s] = supports[t].get(s, Fraction(0)) + moved

    return AlignmentMap(
        trace.source_length,
        tuple(tuple(sorted(sup.items())) for sup in supports),
    )


def project_durations(source_durations: Sequence[float], amap: AlignmentMap) -> list[float]:
    """Target durations as share-weighted sums of source durations."""
    if len(source_durations) != amap.source_length:
        raise LengthMismatch(f"{len(source_durations)} durations for {amap.source_length} source phonemes")
    exact = [Fraction(d) for d in source_durations]
    if any(d < 0 for d in exact):
        raise AlignmentError("durations must be non-negative")
    return [float(sum((w * exact[s] for s, w in sup), Fraction(0))) for sup in amap.supports]


def align_durations(
    trace: TransformTrace,
    source_durations: Sequence[float],
    policy: InsertionPolicy = DEFAULT_POLICY,
) -> list[float]:
    return project_durations(source_durations, alignment_from_trace(trace, policy))


def total_preserved(src: Sequence[float], out: Sequence[float], rel_tol: float = 1e-9) -> bool:
    return math.isclose(math.fsum(src), math.fsum(out), rel_tol=rel_tol)
