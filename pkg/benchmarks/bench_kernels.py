"""Time the compiled kernels against their pure-Python fallbacks.

Both implementations must agree bit for bit, so this harness first checks
parity on the generated workload and only then times each backend. Run
from the repo root after an editable install:

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import argparse
import random
import time

from kbforge._kernels import BACKEND, _pure

try:
    from kbforge._kernels import _fast
except ImportError:
    _fast = None

PREFIX_TARGETS = (0.95, 0.9, 0.75)


def make_pairs(n: int, seed: int) -> list[tuple[bytes, bytes]]:
    rng = random.Random(seed)
    return [
        (
            f"Q{rng.randrange(1, 10**8)}".encode(),
            f"P{rng.randrange(1, 10**4)}".encode(),
        )
        for _ in range(n)
    ]


def make_flags(n: int, seed: int) -> bytes:
    rng = random.Random(seed)
    return bytes(1 if rng.random() < 0.9 else 0 for _ in range(n))


def best_of(fn, repeat: int) -> float:
    """Minimum wall time over ``repeat`` runs; min is the least noisy."""
    times = []
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        times.append(time.perf_counter() - started)
    return min(times)


def bench_pair_priorities(impl, pairs):
    return lambda: impl.pair_priorities(7, pairs)


def bench_prefix_cut(impl, flags):
    def run():
        for target in PREFIX_TARGETS:
            impl.prefix_cut(flags, target)
            impl.prefix_cut(flags, target, first_dip=True)

    return run


def check_parity(pairs, flags) -> None:
    assert _fast.pair_priorities(7, pairs) == _pure.pair_priorities(7, pairs)
    for target in PREFIX_TARGETS:
        for first_dip in (False, True):
            assert _fast.prefix_cut(flags, target, first_dip) == _pure.prefix_cut(
                flags, target, first_dip
            )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=50_000,
                        help="sampling-priority workload size")
    parser.add_argument("--ranked", type=int, default=500_000,
                        help="ranked-list length for the prefix cut")
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing runs per case; best is reported")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)

    print(f"selected backend at import: {BACKEND}")
    if _fast is None:
        print("compiled extension not built; nothing to compare against")
        return 1

    pairs = make_pairs(args.pairs, args.seed)
    flags = make_flags(args.ranked, args.seed + 1)
    check_parity(pairs, flags)
    print("parity: ok (identical outputs on the timed workload)")

    cases = [
        (f"pair_priorities ({args.pairs:,} pairs)",
         bench_pair_priorities(_pure, pairs), bench_pair_priorities(_fast, pairs)),
        (f"prefix_cut ({args.ranked:,} ranked, {2 * len(PREFIX_TARGETS)} cuts)",
         bench_prefix_cut(_pure, flags), bench_prefix_cut(_fast, flags)),
    ]
    print(f"{'kernel':<44} {'pure s':>10} {'cython s':>10} {'speedup':>8}")
    for name, pure_fn, fast_fn in cases:
        pure_s = best_of(pure_fn, args.repeat)
        fast_s = best_of(fast_fn, args.repeat)
        print(f"{name:<44} {pure_s:>10.4f} {fast_s:>10.4f} {pure_s / fast_s:>8.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
