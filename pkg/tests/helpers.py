"""Random generators shared by the property and acceptance tests."""

from __future__ import annotations

import random
import struct
from fractions import Fraction

from accent_forge.ipa import BOUNDARY, SECONDARY, STRESS, Segment, Utterance, Word, default_inventory
from accent_forge.trace import Delete, Insert, Keep, Substitute, TransformTrace

SYMBOLS = tuple(default_inventory().symbols)


def random_word(rng: random.Random, max_phonemes: int = 8, marks: bool = True) -> Word:
    segs: list[Segment] = []
    for k in range(rng.randint(1, max_phonemes)):
        if marks:
            r = rng.random()
            if r < 0.08:
                segs.append(STRESS)
            elif r < 0.11:
                segs.append(SECONDARY)
            elif r < 0.15 and k:
                segs.append(BOUNDARY)
        segs.append(Segment.phoneme(rng.choice(SYMBOLS)))
    return Word(tuple(segs))


def random_utterance(rng: random.Random, max_words: int = 12, max_phonemes: int = 8, marks: bool = True) -> Utterance:
    return Utterance(tuple(random_word(rng, max_phonemes, marks) for _ in range(rng.randint(1, max_words))))


def random_trace(rng: random.Random, max_ops: int = 16) -> TransformTrace:
    """A well-formed trace mixing every op kind, including n:m substitutions."""
    ops = []
    src = out = 0
    for _ in range(rng.randint(1, max_ops)):
        kind = rng.choice("KKSSIDN")
        if kind == "K":
            ops.append(Keep(src, out))
            src += 1
            out += 1
        elif kind == "S":
            ops.append(Substitute(src, src + 1, out, out + 1, "r", ("a",)))
            src += 1
            out += 1
        elif kind == "N":
            a, b = rng.randint(1, 3), rng.randint(1, 3)
            ops.append(Substitute(src, src + a, out, out + b, "r", ("a",) * b))
            src += a
            out += b
        elif kind == "I":
            ops.append(Insert(out, "r", "e"))
            out += 1
        else:
            ops.append(Delete(src, "r"))
            src += 1
    if not any(isinstance(op, (Keep, Substitute)) for op in ops):
        # the engine never deletes a whole word, so some target survives
        ops.append(Keep(src, out))
        src += 1
    return TransformTrace(("x",) * src, tuple(ops))


def random_durations(rng: random.Random, n: int) -> list[float]:
    return [rng.choice((0.0, rng.uniform(0.01, 0.4), rng.expovariate(10.0))) for _ in range(n)]


def wav_bytes(payload: bytes = b"\x00\x00" * 8) -> bytes:
    fmt = struct.pack("<4sIHHIIHH", b"fmt ", 16, 1, 1, 16000, 32000, 2, 16)
    data = b"data" + struct.pack("<I", len(payload)) + payload
    body = b"WAVE" + fmt + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


def exact_sum(xs) -> Fraction:
    return sum((Fraction(x) for x in xs), Fraction(0))
