"""Full pipeline on xyz = 1 (z = 1/(x^2 - y^2) after rotation), with the report on stdout."""

import argparse
import sys

from geogalois.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", help="also write the JSON report here")
    ap.add_argument("--threads", type=int, default=None)
    a = ap.parse_args()
    argv = ["analyze", "--f", "1/(x^2-y^2)"]
    if a.json:
        argv += ["--json", a.json]
    if a.threads:
        argv += ["--threads", str(a.threads)]
    sys.exit(main(argv))
