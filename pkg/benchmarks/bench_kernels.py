"""Time the compiled and pure-Python witness search on the same instances.

    python3 benchmarks/bench_kernels.py [--sizes 2 4 6 8] [--repeat 3]

Each instance is the straight segment of length n along the x-axis of the
Z^2 Cayley graph, with mu* computed at (Q, q) = (3, 0).  Both backends must
return the same value and node count; the script exits non-zero otherwise.
"""
import argparse
import sys
import time

from morselab import kernels
from morselab.cayley import GroupSpec, build_ball
from morselab.morse import mu_star
from morselab.qgpaths import path_from_letters


def timed(ball, gamma, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = mu_star(ball, gamma, 3, 0, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return res, best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 6, 8])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels.compiled_witness_search is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    print(f"{'n':>3} {'mu*':>4} {'nodes':>10} {'cython s':>10} {'python s':>10} {'speedup':>8}")
    status = 0
    for n in args.sizes:
        ball = build_ball(GroupSpec.abelian("a", "b"), 2 * n + 2)
        gamma = path_from_letters(ball, [0] * n, ball.origin)
        rc, tc = timed(ball, gamma, kernels.compiled_witness_search, args.repeat)
        rp, tp = timed(ball, gamma, kernels.python_witness_search, args.repeat)
        if (rc.value, rc.nodes) != (rp.value, rp.nodes):
            print(f"backends disagree at n={n}: {rc} vs {rp}", file=sys.stderr)
            status = 1
        print(f"{n:>3} {rc.value:>4} {rc.nodes:>10} {tc:>10.4f} {tp:>10.4f} {tp / max(tc, 1e-9):>8.1f}")
    return status


if __name__ == "__main__":
    sys.exit(main())
