"""Command-line entry point: ``geogalois <command> ...``.

Exit codes: 0 for a NonIntegrable verdict (or a completed run for pde-test
and geodesic), 2 for any inconclusive verdict or a faulted trajectory,
1 for bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
import time
from fractions import Fraction

from .exactalg import PoleOrderTooHigh
from .exprcore import ExprError, parse, to_ratfun
from .geom import GeodesicState, ImplicitSurface, SingularGradient, integrate_geodesic, tangent_frame
from .kovacic import classify, resolve_threads
from .nve import (
    NonConstantBeta,
    NotFuchsian,
    derive_nve,
    family_closed_form,
    family_surface,
    make_surface,
    normal_form,
    pde_candidate_test,
)
from .report import Report

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2

FAMILY_NOTE = (
    "for f = (x^2-y^2)^(-n) the derived r equals "
    "+2n^2(2n+1)(4n^3-10n^2-y^(4n+2)(4n+5)) / (y^2 (4n^2+y^(4n+2))^2); "
    "an overall minus sign in front of this expression would not match the NVE"
)


class InputError(Exception):
    pass


def _emit(report: Report, args) -> None:
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.to_json())
    if not args.quiet:
        # geodesic without --out owns stdout for the CSV
        stream = sys.stderr if report.command == "geodesic" and not args.out else sys.stdout
        stream.write(report.render())


def _pipeline(f_text: str, command: str, args, inputs: dict) -> Report:
    t0 = time.perf_counter()
    surface = make_surface(f_text)
    nve = derive_nve(surface)
    nf = normal_form(nve)
    verdict = classify(nf.r, resolve_threads(args.threads), prefilter=not args.no_prefilter)
    return Report(command, inputs, nve, nf, verdict, timing=time.perf_counter() - t0)


def cmd_analyze(args) -> tuple[int, Report]:
    rep = _pipeline(args.f, "analyze", args, {"f": args.f, "mode": "analyze"})
    return rep.verdict.exit_code, rep


def cmd_family(args) -> tuple[int, Report]:
    if args.n < 1:
        raise InputError("--n must be a positive integer")
    f = str(family_surface(args.n).f)
    rep = _pipeline(f, "family", args, {"n": args.n, "f": f, "mode": "family"})
    rep.extra["closed_form_matches"] = rep.normal_form.r == family_closed_form(args.n)
    rep.notes.append(FAMILY_NOTE)
    return rep.verdict.exit_code, rep


def cmd_kovacic(args) -> tuple[int, Report]:
    t0 = time.perf_counter()
    r = to_ratfun(parse(args.r), "y")
    verdict = classify(r, resolve_threads(args.threads), prefilter=not args.no_prefilter)
    rep = Report("kovacic", {"r": args.r, "mode": "kovacic"}, verdict=verdict, timing=time.perf_counter() - t0)
    rep.extra["r_canonical"] = str(r)
    return verdict.exit_code, rep


def cmd_pde(args) -> tuple[int, Report]:
    res = pde_candidate_test(args.f)
    rep = Report("pde-test", {"f": args.f, "mode": "pde-test"})
    rep.extra["pde"] = {"status": res.status, "mode": res.mode, "residual": res.residual}
    if res.witness is not None:
        rep.extra["pde"]["witness_y"] = str(res.witness)
    return EXIT_OK, rep


def _floats(text: str, n: int) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise InputError(f"expected {n} comma-separated numbers, got {text!r}") from exc
    if len(vals) != n:
        raise InputError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def cmd_geodesic(args) -> tuple[int, Report]:
    S = ImplicitSurface(args.F, Fraction(args.c))
    start = _floats(args.start, 3)
    t1, t2 = tangent_frame(S, start)
    if args.dir == "random":
        th = random.Random(args.seed).uniform(0, 2 * math.pi)
        vel = tuple(math.cos(th) * a + math.sin(th) * b for a, b in zip(t1, t2))
    else:
        v = _floats(args.dir, 3)
        norm = math.sqrt(sum(x * x for x in v))
        vel = tuple(x / norm for x in v)
    try:
        ic = GeodesicState.make(S, start, vel)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    t0 = time.perf_counter()
    traj = integrate_geodesic(S, ic, args.length, args.step, sample_every=args.sample_every)
    if args.out:
        traj.to_csv(args.out)
    rep = Report("geodesic", {"F": args.F, "c": args.c, "start": args.start, "dir": args.dir, "mode": "geodesic"})
    rep.timing = time.perf_counter() - t0
    rep.extra["trajectory"] = {
        "samples": len(traj.s),
        "max_F_drift": f"{traj.max_F_drift:.3e}",
        "max_speed_drift": f"{traj.max_speed_drift:.3e}",
        "end": [f"{x:.17g}" for x in traj.positions[-1]],
        "fault": traj.fault,
    }
    if not args.out:
        traj.to_csv(sys.stdout)
    return (EXIT_INCONCLUSIVE if traj.fault else EXIT_OK), rep


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the JSON report to PATH")
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: $GG_THREADS or 1)")
    common.add_argument("--quiet", action="store_true", help="suppress the text report")
    common.add_argument("--no-prefilter", action="store_true", help="skip the interval pre-filter")

    p = argparse.ArgumentParser(prog="geogalois", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="full pipeline for z = f(x, y)")
    a.add_argument("--f", required=True)
    a.set_defaults(func=cmd_analyze)

    k = sub.add_parser("kovacic", parents=[common], help="classify w'' = r w for r in y")
    k.add_argument("--r", required=True)
    k.set_defaults(func=cmd_kovacic)

    fam = sub.add_parser("family", parents=[common], help="run the pipeline on x^n y^n z = 1")
    fam.add_argument("--n", type=int, required=True)
    fam.set_defaults(func=cmd_family)

    g = sub.add_parser("geodesic", parents=[common], help="integrate a geodesic on F = c, CSV output")
    g.add_argument("--F", required=True)
    g.add_argument("--c", default="0")
    g.add_argument("--start", required=True, help="x,y,z")
    g.add_argument("--dir", default="random", help="'random' or vx,vy,vz (projected onto unit length)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--length", type=float, default=5.0)
    g.add_argument("--step", type=float, default=1e-3)
    g.add_argument("--sample-every", type=int, default=1)
    g.add_argument("--out", metavar="CSV")
    g.set_defaults(func=cmd_geodesic)

    t = sub.add_parser("pde-test", parents=[common], help="candidate test y f_xx = f_y on x = 0")
    t.add_argument("--f", required=True)
    t.set_defaults(func=cmd_pde)
    return p


_VALUE_FLAGS = ("--r", "--f", "--F", "--c", "--dir", "--start")


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Let ``--r -18*...`` through argparse, which would read it as a flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
            continue
        out.append(argv[i])
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    try:
        code, rep = args.func(args)
    except (ExprError, InputError, ValueError, ZeroDivisionError, SingularGradient) as exc:
        err = {"schema": 1, "command": args.command, "error": f"{type(exc).__module__}.{type(exc).__name__}", "message": str(exc)}
        if args.json:
            with open(args.json, "w") as fh:
                json.dump(err, fh, indent=2, sort_keys=True)
                fh.write("\n")
        print(f"error [{err['error']}]: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NotFuchsian, NonConstantBeta, PoleOrderTooHigh) as exc:
        print(f"inconclusive [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    _emit(rep, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
