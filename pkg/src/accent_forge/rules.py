"""Context-sensitive phoneme rewrite rules and their application."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping as MappingType

from .ipa import Inventory, Segment, SegmentKind, Utterance, Word, default_inventory
from .trace import Delete, EditOp, Insert, Keep, Substitute, TransformTrace, compose, concat


class RuleError(ValueError):
    pass


class InventoryMismatch(RuleError):
    pass


class UnknownRuleId(RuleError):
    pass


class Context(enum.Enum):
    WORD_INITIAL = "word-initial"
    WORD_FINAL = "word-final"
    ANYWHERE = "anywhere"
    # preceded by a vowel, and followed by a vowel or the end of the word
    POST_VOCALIC = "post-vocalic"


@dataclass(frozen=True, slots=True)
class Mapping:
    source: tuple[str, ...]
    target: tuple[str, ...]
    tag: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        if not self.source:
            raise RuleError("mapping source must be non-empty")


@dataclass(frozen=True, slots=True)
class RewriteRule:
    id: str
    name: str
    context: Context
    entries: tuple[Mapping, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for m in self.entries:
            if m.source in seen:
                raise RuleError(f"rule {self.id!r}: duplicate source {' '.join(m.source)}")
            seen.add(m.source)

    def symbols(self) -> set[str]:
        return {s for m in self.entries for s in m.source + m.target}


@dataclass(frozen=True, slots=True)
class RuleSet:
    name: str
    rules: tuple[RewriteRule, ...]
    inventory_ref: str = "default@1"

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise RuleError(f"duplicate rule id {dup!r}")

    @property
    def rule_ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.rules)

    def rule(self, rule_id: str) -> RewriteRule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise UnknownRuleId(rule_id)


@dataclass(frozen=True)
class ApplyOptions:
    """Accent-strength controls.

    ``per_rule_probability`` gives the chance that each candidate match of
    a rule fires; draws are keyed on (seed, rule id, word index, match
    position) so a seed pins the outcome. ``disabled_tags`` switches off
    tagged mapping entries (e.g. ``stop-voicing`` in the Spanish preset).
    """

    enabled_rule_ids: frozenset[str] | None = None
    per_rule_probability: MappingType[str, float] = field(default_factory=dict)
    seed: int = 0
    disabled_tags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.enabled_rule_ids is not None:
            object.__setattr__(self, "enabled_rule_ids", frozenset(self.enabled_rule_ids))
        object.__setattr__(self, "disabled_tags", frozenset(self.disabled_tags))
        object.__setattr__(self, "per_rule_probability", dict(self.per_rule_probability))
        for rid, p in self.per_rule_probability.items():
            if not 0.0 <= p <= 1.0:
                raise RuleError(f"probability for {rid!r} must be in [0, 1], got {p}")
        if not -(2**63) <= self.seed < 2**64:
            raise RuleError("seed must fit in 64 bits")

    def check_against(self, rs: RuleSet) -> None:
        known = set(rs.rule_ids)
        for rid in (self.enabled_rule_ids or set()) | set(self.per_rule_probability):
            if rid not in known:
                raise UnknownRuleId(f"{rid!r} is not a rule of {rs.name!r}")


DEFAULT_OPTIONS = ApplyOptions()


def _align_entry(source: tuple[str, ...], target: tuple[str, ...]) -> tuple[tuple, ...]:
    """Local ops for one mapping: shared symbols kept, gaps rewritten.

    Uses an LCS alignment so e.g. ``s t -> e s t`` is an insertion of ``e``
    followed by two keeps.
    """
    n, m = len(source), len(target)
    lcs = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if source[i] == target[j]:
                lcs[i][j] = lcs[i + 1][j + 1] + 1
            else:
                lcs[i][j] = max(lcs[i + 1][j], lcs[i][j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if source[i] == target[j] and lcs[i][j] == lcs[i + 1][j + 1] + 1:
            pairs.append((i, j))
            i += 1
            j += 1
        elif lcs[i + 1][j] >= lcs[i][j + 1]:
            i += 1
        else:
            j += 1
    ops: list[tuple] = []
    pi = pj = 0
    for si, tj in pairs + [(n, m)]:
        a, b = si - pi, tj - pj
        if a == b:
            ops.extend(("sub", pi + k, pi + k + 1, pj + k, pj + k + 1) for k in range(a))
        elif a == 0:
            ops.extend(("ins", pj + k) for k in range(b))
        elif b == 0:
            ops.extend(("del", pi + k) for k in range(a))
        else:
            ops.append(("sub", pi, si, pj, tj))
        if si < n:
            ops.append(("keep", si, tj))
        pi, pj = si + 1, tj + 1
    return tuple(ops)


@dataclass(frozen=True)
class _CompiledEntry:
    source: tuple[str, ...]
    target: tuple[str, ...]
    ops: tuple[tuple, ...]


@dataclass(frozen=True)
class _CompiledRule:
    rule: RewriteRule
    index: dict[str, tuple[_CompiledEntry, ...]]  # first symbol -> entries, longest first


@lru_cache(maxsize=256)
def _compile(rule: RewriteRule, disabled_tags: frozenset[str]) -> _CompiledRule:
    by_first: dict[str, list[_CompiledEntry]] = {}
    for m in rule.entries:
        if m.tag is not None and m.tag in disabled_tags:
            continue
        by_first.setdefault(m.source[0], []).append(_CompiledEntry(m.source, m.target, _align_entry(m.source, m.target)))
    index = {k: tuple(sorted(v, key=lambda e: -len(e.source))) for k, v in by_first.items()}
    return _CompiledRule(rule, index)


@lru_cache(maxsize=256)
def _check_inventory(rule: RewriteRule, inventory: Inventory) -> None:
    missing = sorted(s for s in rule.symbols() if s not in inventory)
    if missing:
        raise InventoryMismatch(f"rule {rule.id!r} uses symbols not in inventory {inventory.ref}: {missing}")


def _draw(seed: int, rule_id: str, word_index: int, position: int) -> float:
    key = f"{seed}\x1f{rule_id}\x1f{word_index}\x1f{position}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big") / 2.0**64


def _split(word: Word) -> tuple[list[str], list[list[Segment]]]:
    """Phoneme symbols plus the marks sitting before each (and after the last)."""
    phon: list[str] = []
    anchors: list[list[Segment]] = [[]]
    for seg in word.segments:
        if seg.kind is SegmentKind.PHONEME:
            phon.append(seg.symbol)
            anchors.append([])
        else:
            anchors[-1].append(seg)
    return phon, anchors


def _join(phon: list[str], anchors: list[list[Segment]]) -> Word:
    segs: list[Segment] = []
    for sym, marks in zip(phon, anchors):
        segs.extend(marks)
        segs.append(Segment.phoneme(sym))
    segs.extend(anchors[-1])
    while segs and segs[-1].kind is SegmentKind.SYLLABLE_BOUNDARY:
        segs.pop()
    return Word(tuple(segs))


def _scan(
    cr: _CompiledRule,
    phon: list[str],
    anchors: list[list[Segment]],
    inv: Inventory,
    fire: Callable[[int], bool] | None,
) -> tuple[list[str], list[list[Segment]], TransformTrace] | None:
    """Single left-to-right pass; None when nothing fired."""
    index = cr.index
    if not any(p in index for p in phon):
        return None
    n = len(phon)
    context = cr.rule.context
    rule_id = cr.rule.id

    out: list[str] = []
    out_anchors: list[list[Segment]] = []
    pending: list[Segment] = []
    ops: list[EditOp] = []
    fired = False
    i = 0
    while i < n:
        hit = None
        cands = index.get(phon[i])
        if cands:
            for e in cands:
                ln = len(e.source)
                if i + ln > n or (ln > 1 and tuple(phon[i : i + ln]) != e.source):
                    continue
                if context is Context.WORD_INITIAL and i != 0:
                    continue
                if context is Context.WORD_FINAL and i + ln != n:
                    continue
                if context is Context.POST_VOCALIC and not (
                    i > 0 and inv.is_vowel(phon[i - 1]) and (i + ln == n or inv.is_vowel(phon[i + ln]))
                ):
                    continue
                hit = e
                break
        if hit is None or (fire is not None and not fire(i)):
            pending.extend(anchors[i])
            ops.append(Keep(i, len(out)))
            out_anchors.append(pending)
            pending = []
            out.append(phon[i])
            i += 1
            continue
        fired = True
        base = len(out)
        pending.extend(anchors[i])
        for op in hit.ops:
            kind = op[0]
            if kind == "keep":
                _, s, t = op
                if s:
                    pending.extend(anchors[i + s])
                ops.append(Keep(i + s, base + t))
                out_anchors.append(pending)
                pending = []
                out.append(hit.target[t])
            elif kind == "sub":
                _, s0, s1, t0, t1 = op
                for s in range(max(s0, 1), s1):
                    pending.extend(anchors[i + s])
                syms = hit.target[t0:t1]
                ops.append(Substitute(i + s0, i + s1, base + t0, base + t1, rule_id, syms))
                for x in syms:
                    out_anchors.append(pending)
                    pending = []
                    out.append(x)
            elif kind == "ins":
                _, t = op
                ops.append(Insert(base + t, rule_id, hit.target[t]))
                out_anchors.append(pending)
                pending = []
                out.append(hit.target[t])
            else:
                _, s = op
                if s:
                    pending.extend(anchors[i + s])
                ops.append(Delete(i + s, rule_id))
        i += len(hit.source)
    if not fired:
        return None
    if not out:
        raise RuleError(f"rule {rule_id!r} deletes every phoneme of a word")
    pending.extend(anchors[n])
    out_anchors.append(pending)
    return out, out_anchors, TransformTrace(tuple(phon), tuple(ops))


def apply_rule(
    rule: RewriteRule,
    word: Word,
    inventory: Inventory | None = None,
    *,
    probability: float = 1.0,
    seed: int = 0,
    word_index: int = 0,
    disabled_tags: frozenset[str] = frozenset(),
) -> tuple[Word, TransformTrace]:
    """Apply one rule to one word in a single left-to-right pass.

    At each position the longest source entry whose context holds fires;
    scanning resumes after the replaced span. Stress and boundary marks are
    skipped for adjacency and kept at their relative positions.
    """
    inv = inventory or default_inventory()
    _check_inventory(rule, inv)
    if word.oov is not None:
        return word, TransformTrace((), ())
    fire = _make_fire(rule.id, probability, seed, word_index)
    phon, anchors = _split(word)
    res = _scan(_compile(rule, frozenset(disabled_tags)), phon, anchors, inv, fire)
    if res is None:
        return word, TransformTrace.identity(phon)
    return _join(res[0], res[1]), res[2]


def _make_fire(rule_id: str, p: float, seed: int, word_index: int) -> Callable[[int], bool] | None:
    if p >= 1.0:
        return None
    if p <= 0.0:
        return lambda pos: False
    return lambda pos: _draw(seed, rule_id, word_index, pos) < p


def apply_ruleset(
    rs: RuleSet,
    u: Utterance,
    opts: ApplyOptions | None = None,
    inventory: Inventory | None = None,
) -> tuple[Utterance, TransformTrace]:
    """Apply every enabled rule in order, each over the previous rule's output.

    Input durations are dropped; see :mod:`accent_forge.align` for
    projecting them onto the result.
    """
    opts = opts or DEFAULT_OPTIONS
    opts.check_against(rs)
    inv = inventory or default_inventory()
    active = []
    for rule in rs.rules:
        _check_inventory(rule, inv)
        if opts.enabled_rule_ids is not None and rule.id not in opts.enabled_rule_ids:
            continue
        p = opts.per_rule_probability.get(rule.id, 1.0)
        if p <= 0.0:
            continue
        active.append((_compile(rule, opts.disabled_tags), p))

    words: list[Word] = []
    traces: list[TransformTrace] = []
    for w_idx, word in enumerate(u.words):
        if word.oov is not None:
            words.append(word)
            continue
        phon, anchors = _split(word)
        acc: TransformTrace | None = None
        for cr, p in active:
            res = _scan(cr, phon, anchors, inv, _make_fire(cr.rule.id, p, opts.seed, w_idx))
            if res is not None:
                phon, anchors, t = res
                acc = t if acc is None else compose(acc, t)
        if acc is None:
            words.append(word)
            traces.append(TransformTrace.identity(phon))
        else:
            words.append(_join(phon, anchors))
            traces.append(acc)
    return Utterance(tuple(words)), concat(traces)
