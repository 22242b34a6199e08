"""Count admissible family-A pairs (G = Z_n, theta = -1) against every Gamma of order n + 4.

With the indicator filters on, the n = 5 row should show 3 solutions.
"""

import argparse
import time

from artifact.metric import as_phase, gauss_sum
from artifact.workbench import SearchSpec, search


def shapes(order: int, step: int = 1) -> list[tuple[int, ...]]:
    """Invariant factor lists d1 | d2 | ... with product ``order``, each d_i > 1."""
    if order == 1:
        return [()]
    out = []
    for d in range(2, order + 1):
        if order % d == 0 and d % step == 0:
            rest = order // d
            # later factors must be multiples of d
            out += [(d,) + tail for tail in shapes(rest, d) if not tail or tail[0] % d == 0]
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=13)
    ap.add_argument("--no-fs", action="store_true")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    for n in range(3, args.max_n + 1, 2):
        seconds = tuple(shapes(n + 4))
        start = time.perf_counter()
        hits = search(SearchSpec("A", ((n,),), seconds, fs_filters=not args.no_fs), args.threads)
        took = time.perf_counter() - start
        print(f"G = Z{n}: {len(hits)} solution(s) in {took:.2f}s")
        for h in hits:
            first, second = h.instance.first.form, h.instance.second.form
            print(f"    {first} with {second}, Gauss sums {as_phase(gauss_sum(first))}, "
                  f"{as_phase(gauss_sum(second))}")


if __name__ == "__main__":
    main()
