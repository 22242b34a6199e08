"""Build every family example in the fixture corpus and print relation residuals, rank and timing."""

import argparse
import time

from artifact.errors import Rejected
from artifact.families import FamilyInput, family_build, family_instance_make
from artifact.moddata import check_fs2, check_fs3, verify_relations, verlinde_numeric
from artifact.workbench import fixture_names, load_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()
    for name in fixture_names():
        fx = load_fixture(name)
        inputs = fx.payload.get("inputs") or ([fx.payload["input"]] if "input" in fx.payload else [])
        for raw in inputs:
            inp = FamilyInput.from_json(raw)
            start = time.perf_counter()
            try:
                inst = family_instance_make(inp)
            except Rejected as exc:  # rejected inputs are part of the corpus
                print(f"{name:28s} rejected: {exc}")
                continue
            md = family_build(inst, args.tol)
            rel = verify_relations(md, args.tol)
            fusion = verlinde_numeric(md)
            fs = all(c.ok for c in check_fs2(md, fusion)) and all(c.ok for c in check_fs3(md, fusion))
            worst = max(rel.residuals[k] for k in ("unitarity", "s_squared", "st_cubed"))
            print(f"{name:28s} family {inst.family} rank {md.rank:3d}  residual {worst:.1e}  "
                  f"FS {'ok' if fs else 'FAIL'}  {time.perf_counter() - start:.2f}s")


if __name__ == "__main__":
    main()
