"""Odd family-A pairs where G has 3-rank r: report N_pipipi and nu_3(pi) for every admissible form pair.

For r >= 3 the indicator at pi cannot be split as N_pipipi = 1 requires, so every line should read FAIL.
"""

import argparse
import itertools
from fractions import Fraction

from artifact.abgroup import Group
from artifact.errors import Rejected
from artifact.exactnum import Phase
from artifact.families import family_build, family_instance_make
from artifact.metric import QuadraticForm, as_phase, enumerate_quadratic_forms, gauss_sum
from artifact.moddata import Label, check_fs3, verlinde_numeric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rank", type=int, default=3, help="3-rank of G")
    args = ap.parse_args()
    g = Group((3,) * args.rank)
    gamma = Group((g.size + 4,))
    seen = set()
    for diag in itertools.product((Fraction(1, 3), Fraction(2, 3)), repeat=args.rank):
        f1 = QuadraticForm.make(g, list(diag), {})
        c1 = as_phase(gauss_sum(f1))
        if c1 in seen:
            continue
        seen.add(c1)
        for f2 in enumerate_quadratic_forms(gamma):
            if as_phase(gauss_sum(f2)) != c1 * Phase(1, 2):
                continue
            try:
                inst = family_instance_make("A", f1, f2)
            except Rejected as exc:
                print(f"{f1} with {f2}: rejected ({exc})")
                break
            md = family_build(inst)
            fusion = verlinde_numeric(md)
            pi = md.index(Label("upi", g.zero))
            check = check_fs3(md, fusion)[pi]
            print(f"{f1} with {f2}: N_pipipi = {fusion[pi, pi, pi]}, nu3(pi) = {check.value.real:.3f}, "
                  f"{'ok' if check.ok else 'FAIL'}")
            break


if __name__ == "__main__":
    main()
