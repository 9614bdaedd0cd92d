"""Check that the exponent at the origin stays irrational for every n up to a bound."""

import argparse
import time

from geogalois.kovacic import irrationality_check

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=10**4)
    a = ap.parse_args()
    t0 = time.perf_counter()
    failures = [n for n in range(1, a.max_n + 1) if not irrationality_check(n)]
    dt = time.perf_counter() - t0
    print(f"checked 1..{a.max_n} in {dt:.3f} s; failures: {failures or 'none'}")
