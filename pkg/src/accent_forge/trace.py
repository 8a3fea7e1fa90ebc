"""Edit traces linking a source phoneme sequence to its rewritten form.

Indexes count phonemes only (stress and boundary marks are not part of a
trace). ``Substitute`` and ``Insert`` carry their output symbols so a
trace can be replayed against its source.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union


class TraceError(ValueError):
    pass


class LengthMismatch(TraceError):
    pass


@dataclass(frozen=True, slots=True)
class Keep:
    src: int
    out: int


@dataclass(frozen=True, slots=True)
class Substitute:
    src_start: int
    src_stop: int
    out_start: int
    out_stop: int
    rule_id: str
    symbols: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class Insert:
    out: int
    rule_id: str
    symbol: str


@dataclass(frozen=True, slots=True)
class Delete:
    src: int
    rule_id: str


EditOp = Union[Keep, Substitute, Insert, Delete]


def _src_span(op: EditOp) -> range:
    if isinstance(op, Keep):
        return range(op.src, op.src + 1)
    if isinstance(op, Substitute):
        return range(op.src_start, op.src_stop)
    if isinstance(op, Delete):
        return range(op.src, op.src + 1)
    return range(0)


def _out_span(op: EditOp) -> range:
    if isinstance(op, Keep):
        return range(op.out, op.out + 1)
    if isinstance(op, Substitute):
        return range(op.out_start, op.out_stop)
    if isinstance(op, Insert):
        return range(op.out, op.out + 1)
    return range(0)


def _shift(op: EditOp, ds: int, do: int) -> EditOp:
    if isinstance(op, Keep):
        return Keep(op.src + ds, op.out + do)
    if isinstance(op, Substitute):
        return Substitute(op.src_start + ds, op.src_stop + ds, op.out_start + do, op.out_stop + do, op.rule_id, op.symbols)
    if isinstance(op, Insert):
        return Insert(op.out + do, op.rule_id, op.symbol)
    return Delete(op.src + ds, op.rule_id)


@dataclass(frozen=True, slots=True)
class TransformTrace:
    source: tuple[str, ...]
    ops: tuple[EditOp, ...]

    @classmethod
    def identity(cls, source: Sequence[str]) -> "TransformTrace":
        return cls(tuple(source), tuple(Keep(i, i) for i in range(len(source))))

    @property
    def source_length(self) -> int:
        return len(self.source)

    @property
    def output_length(self) -> int:
        return sum(len(_out_span(op)) for op in self.ops)

    @property
    def is_identity(self) -> bool:
        return all(isinstance(op, Keep) for op in self.ops)

    def altered_sources(self) -> set[int]:
        """Source indexes touched by a non-Keep op."""
        return {i for op in self.ops if not isinstance(op, Keep) for i in _src_span(op)}

    def validate(self) -> None:
        """Check that source and output indexes are each covered once, in order."""
        next_src = next_out = 0
        for op in self.ops:
            src, out = _src_span(op), _out_span(op)
            if isinstance(op, Substitute) and (not src or not out or len(op.symbols) != len(out)):
                raise TraceError(f"malformed substitution {op}")
            if src and src.start != next_src:
                raise TraceError(f"source index {next_src} not covered in order at {op}")
            if out and out.start != next_out:
                raise TraceError(f"output index {next_out} not covered in order at {op}")
            next_src += len(src)
            next_out += len(out)
        if next_src != len(self.source):
            raise TraceError(f"trace covers {next_src} of {len(self.source)} source indexes")

    def replay(self) -> tuple[str, ...]:
        """Rebuild the output sequence from the source and the ops."""
        out: list[str] = []
        for op in self.ops:
            if isinstance(op, Keep):
                out.append(self.source[op.src])
            elif isinstance(op, Substitute):
                out.extend(op.symbols)
            elif isinstance(op, Insert):
                out.append(op.symbol)
        return tuple(out)


def concat(traces: Iterable[TransformTrace]) -> TransformTrace:
    """Join traces of consecutive sequences (e.g. words) into one."""
    source: list[str] = []
    ops: list[EditOp] = []
    out_len = 0
    for t in traces:
        ds = len(source)
        ops.extend(_shift(op, ds, out_len) for op in t.ops)
        source.extend(t.source)
        out_len += t.output_length
    return TransformTrace(tuple(source), tuple(ops))


def compose(t1: TransformTrace, t2: TransformTrace) -> TransformTrace:
    """Compose ``t1`` (source -> mid) with ``t2`` (mid -> output).

    Keep after Keep stays Keep. Any other chain collapses to a non-Keep op
    tagged with the latest rule that touched it. Ops whose spans
    interleave are merged into one n:m Substitute.
    """
    mid_len = t1.output_length
    if mid_len != t2.source_length:
        raise LengthMismatch(f"first trace yields {mid_len} phonemes, second expects {t2.source_length}")
    mid = t1.replay()
    if mid != t2.source:
        raise TraceError("second trace's source differs from first trace's output")
    if t1.is_identity:
        return TransformTrace(t1.source, t2.ops)
    if t2.is_identity:
        return t1
    out_symbols = t2.replay()
    if _one_to_one(t1) and _one_to_one(t2):
        return TransformTrace(t1.source, tuple(_compose_1to1(t1.ops, t2.ops, out_symbols)))

    producer: list[int] = [0] * mid_len  # mid index -> t1 op index
    for k, op in enumerate(t1.ops):
        for m in _out_span(op):
            producer[m] = k

    # Each unit is one t2 op (with the t1 ops it consumes) or one stray
    # t1 Delete. Units sharing a t1 op belong to the same component.
    units: list[tuple[list[int], int | None]] = []  # (t1 op indexes, t2 op index)
    p = 0
    n1 = len(t1.ops)
    for k2, op2 in enumerate(t2.ops):
        span = _src_span(op2)
        if not span:
            units.append(([], k2))
            continue
        first, last = producer[span.start], producer[span.stop - 1]
        while p < first:
            units.append(([p], None))
            p += 1
        linked = list(range(first, last + 1))
        units.append((linked, k2))
        p = max(p, last + 1)
    while p < n1:
        units.append(([p], None))
        p += 1

    last_seen: dict[int, int] = {}
    for u, (linked, _) in enumerate(units):
        for k in linked:
            last_seen[k] = u

    ops: list[EditOp] = []
    u = 0
    while u < len(units):
        end = u
        v = u
        while v <= end:
            for k in units[v][0]:
                end = max(end, last_seen[k])
            v += 1
        block = units[u : end + 1]
        u = end + 1
        ops.extend(_block_ops(block, t1, t2, out_symbols))
    return TransformTrace(t1.source, tuple(ops))


def _one_to_one(t: TransformTrace) -> bool:
    return len(t.ops) == len(t.source) and all(
        type(op) is Keep or (type(op) is Substitute and op.src_stop - op.src_start == 1 and op.out_stop - op.out_start == 1)
        for op in t.ops
    )


def _compose_1to1(ops1, ops2, out_symbols) -> list[EditOp]:
    out: list[EditOp] = []
    for k, (a, b) in enumerate(zip(ops1, ops2)):
        if type(b) is Substitute:
            out.append(b if type(a) is Keep else Substitute(k, k + 1, k, k + 1, b.rule_id, b.symbols))
        elif type(a) is Substitute:
            out.append(a if a.symbols[0] == out_symbols[k] else Substitute(k, k + 1, k, k + 1, a.rule_id, (out_symbols[k],)))
        else:
            out.append(a)
    return out


def _block_ops(block, t1: TransformTrace, t2: TransformTrace, out_symbols: tuple[str, ...]) -> list[EditOp]:
    t1_ops = sorted({k for linked, _ in block for k in linked})
    t2_ops = [k2 for _, k2 in block if k2 is not None]
    srcs = [i for k in t1_ops for i in _src_span(t1.ops[k])]
    outs = [o for k2 in t2_ops for o in _out_span(t2.ops[k2])]
    rule = None
    for k2 in t2_ops:
        if not isinstance(t2.ops[k2], Keep):
            rule = t2.ops[k2].rule_id
    if rule is None:
        for k in t1_ops:
            if not isinstance(t1.ops[k], Keep):
                rule = t1.ops[k].rule_id
    if rule is None:
        # Keep after Keep
        return [Keep(srcs[0], outs[0])]
    if not srcs:
        return [Insert(o, rule, out_symbols[o]) for o in outs]
    if not outs:
        return [Delete(i, rule) for i in srcs]
    return [Substitute(srcs[0], srcs[-1] + 1, outs[0], outs[-1] + 1, rule, tuple(out_symbols[o] for o in outs))]


def op_to_json(op: EditOp) -> dict:
    if isinstance(op, Keep):
        return {"op": "keep", "src": op.src, "out": op.out}
    if isinstance(op, Substitute):
        return {
            "op": "substitute",
            "src": [op.src_start, op.src_stop],
            "out": [op.out_start, op.out_stop],
            "rule": op.rule_id,
            "symbols": list(op.symbols),
        }
    if isinstance(op, Insert):
        return {"op": "insert", "out": op.out, "rule": op.rule_id, "symbol": op.symbol}
    return {"op": "delete", "src": op.src, "rule": op.rule_id}


def trace_to_json(trace: TransformTrace) -> dict:
    return {"source": list(trace.source), "ops": [op_to_json(op) for op in trace.ops]}
