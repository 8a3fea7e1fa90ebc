"""Compare the compiled and pure-Python edit-distance kernels.

    python3 benchmarks/bench_kernels.py --pairs 2000 --length 40
"""

from __future__ import annotations

import argparse
import random
import time

from accent_forge import kernels


def make_pairs(n: int, length: int, alphabet: int, seed: int) -> list[tuple[list[int], list[int]]]:
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        a = [rng.randrange(alphabet) for _ in range(length)]
        b = [x if rng.random() > 0.2 else rng.randrange(alphabet) for x in a]
        for _ in range(rng.randint(0, length // 10)):
            b.insert(rng.randrange(len(b) + 1), rng.randrange(alphabet))
        pairs.append((a, b))
    return pairs


def bench(fn, pairs, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        best = min(best, time.perf_counter() - start)
    return best


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--pairs", type=int, default=2000)
    p.add_argument("--length", type=int, default=40, help="reference length (tokens)")
    p.add_argument("--alphabet", type=int, default=30)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    pairs = make_pairs(args.pairs, args.length, args.alphabet, args.seed)
    py = bench(kernels.python_edit_counts, pairs, args.repeat)
    print(f"pairs={args.pairs} length={args.length} alphabet={args.alphabet}")
    print(f"python  {py * 1e3:9.1f} ms  {py / args.pairs * 1e6:8.1f} us/pair")
    if kernels.compiled_edit_counts is None:
        print("cython  not built (pip install -e . --no-build-isolation with a C compiler)")
        return 0
    for a, b in pairs[:200]:
        assert kernels.compiled_edit_counts(a, b) == kernels.python_edit_counts(a, b)
    cy = bench(kernels.compiled_edit_counts, pairs, args.repeat)
    print(f"cython  {cy * 1e3:9.1f} ms  {cy / args.pairs * 1e6:8.1f} us/pair")
    print(f"speedup {py / cy:9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
