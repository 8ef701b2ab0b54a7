"""Head-to-head timing of the alignment kernels' two backends.

Runs the same random pair workload through the numba-compiled loops and the
vectorized numpy fallback, then prints per-pair timings and the speedup.
JIT compilation happens during warm-up so it never pollutes the measurement.

    python3 benchmarks/bench_kernels.py --pairs 2000 --max-len 80
"""

import argparse
import random
import time

from ocrforge.kernels import (
    JIT_ENABLED,
    encode,
    levenshtein_numba,
    levenshtein_numpy,
    nw_align_numba,
    nw_align_numpy,
)

ALPHABET = "abcdefghijklmnopqrstuvwxyz '.,"


def build_pairs(count: int, min_len: int, max_len: int, seed: int):
    rng = random.Random(seed)

    def one() -> str:
        n = rng.randint(min_len, max_len)
        return "".join(rng.choice(ALPHABET) for _ in range(n))

    return [(encode(one()), encode(one())) for _ in range(count)]


def best_of(repeats: int, fn) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--min-len", type=int, default=20)
    parser.add_argument("--max-len", type=int, default=80)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()

    pairs = build_pairs(args.pairs, args.min_len, args.max_len, args.seed)
    print(f"{args.pairs} pairs, lengths {args.min_len}-{args.max_len}, "
          f"best of {args.repeats} (numba available: {levenshtein_numba is not None}, "
          f"selected by env: {'numba' if JIT_ENABLED else 'numpy'})")

    backends = [("numpy", levenshtein_numpy, nw_align_numpy)]
    if levenshtein_numba is not None:
        # compile both kernels before timing
        a0, b0 = pairs[0]
        levenshtein_numba(a0, b0)
        nw_align_numba(a0, b0, 1, -1, -1)
        backends.insert(0, ("numba", levenshtein_numba, nw_align_numba))

    results: dict[tuple[str, str], float] = {}
    for name, lev, nw in backends:
        results[("levenshtein", name)] = best_of(
            args.repeats, lambda lev=lev: [lev(a, b) for a, b in pairs]
        )
        results[("needleman-wunsch", name)] = best_of(
            args.repeats, lambda nw=nw: [nw(a, b, 1, -1, -1) for a, b in pairs]
        )

    print(f"{'kernel':<18} {'backend':<8} {'total s':>9} {'us/pair':>9} {'speedup':>8}")
    for kernel in ("levenshtein", "needleman-wunsch"):
        base = results.get((kernel, "numpy"))
        for _, name, _ in [(None, n, None) for n in ("numba", "numpy")]:
            if (kernel, name) not in results:
                continue
            total = results[(kernel, name)]
            speed = f"{base / total:6.1f}x" if base and name == "numba" else "      -"
            print(f"{kernel:<18} {name:<8} {total:9.3f} "
                  f"{total / args.pairs * 1e6:9.1f} {speed:>8}")


if __name__ == "__main__":
    main()
