"""Sweep x^n y^n z = 1: closed form of r, exponents, assignment counts and (optionally) the verdict."""

import argparse
import time
from fractions import Fraction

from geogalois.kovacic import assignment_counts, build_esets, classify, irrationality_check
from geogalois.nve import derive_nve, family_closed_form, family_surface, normal_form, singularity_profile


def row(n: int, run_classify: bool, threads: int | None) -> str:
    t0 = time.perf_counter()
    r = normal_form(derive_nve(family_surface(n))).r
    p = singularity_profile(r)
    origin, ring = p.points
    counts = assignment_counts(build_esets(p))
    ordered = "/".join(str(c[0]) for c in counts.values())
    verdict = classify(r, threads).kind if run_classify else "-"
    return (
        f"{n:>3}  {str(r == family_closed_form(n)):<6} {str(origin.beta):>8} "
        f"{str(origin.beta == Fraction((1 + 2 * n) * (2 * n - 5), 4)):<6} {ring.count:>4} {str(ring.beta):>6} "
        f"{str(irrationality_check(n)):<6} {ordered:<40} {verdict:<14} {time.perf_counter() - t0:7.1f}s"
    )


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=4)
    ap.add_argument("--classify-up-to", type=int, default=2, help="run the full case-II search for n up to this")
    ap.add_argument("--threads", type=int, default=None)
    a = ap.parse_args()
    print("  n  closed  beta0    check  ring   beta   irrat  counts by d                              verdict         time")
    for n in range(1, a.max_n + 1):
        print(row(n, n <= a.classify_up_to, a.threads), flush=True)
