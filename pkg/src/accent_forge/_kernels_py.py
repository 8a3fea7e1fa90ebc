"""Pure-Python edit-distance kernel, used when the extension is unavailable."""

from __future__ import annotations

from typing import Hashable, Sequence


def edit_counts(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> tuple[int, int, int]:
    """Return (substitutions, insertions, deletions) of a minimal alignment.

    Backtrace prefers the diagonal (match/substitution), then insertion,
    then deletion.
    """
    n, m = len(ref), len(hyp)
    d = [list(range(m + 1))]
    for i in range(1, n + 1):
        prev = d[-1]
        row = [i]
        r = ref[i - 1]
        for j in range(1, m + 1):
            row.append(min(prev[j - 1] + (r != hyp[j - 1]), row[j - 1] + 1, prev[j] + 1))
        d.append(row)
    subs = ins = dels = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = ref[i - 1] != hyp[j - 1]
            if d[i][j] == d[i - 1][j - 1] + cost:
                subs += cost
                i -= 1
                j -= 1
                continue
        if j > 0 and d[i][j] == d[i][j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return subs, ins, dels
