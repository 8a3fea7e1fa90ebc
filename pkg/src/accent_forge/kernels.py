"""Select the compiled kernels when built, else the pure-Python ones.

Set ``ACCENT_FORGE_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from array import array
from typing import Hashable, Sequence

from . import _kernels_py

BACKEND = "python"
_compiled = None
if not os.environ.get("ACCENT_FORGE_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _compiled = None


def _intern(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> tuple[array, array]:
    ids: dict[Hashable, int] = {}
    a = array("q", [ids.setdefault(t, len(ids)) for t in ref])
    b = array("q", [ids.setdefault(t, len(ids)) for t in hyp])
    return a, b


def edit_counts(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> tuple[int, int, int]:
    """(substitutions, insertions, deletions) turning ``ref`` into ``hyp``."""
    if _compiled is None:
        return _kernels_py.edit_counts(ref, hyp)
    a, b = _intern(ref, hyp)
    return _compiled.edit_counts(a, b)


python_edit_counts = _kernels_py.edit_counts
compiled_edit_counts = None if _compiled is None else (lambda r, h: _compiled.edit_counts(*_intern(r, h)))
