"""Report assembly and serialization for the command line."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import __version__
from .kovacic import Verdict, modified_exponents
from .nve import NVECoefficients, NormalFormODE, PointData, SingularityProfile, format_tau

SCHEMA = 1


def q(x: Fraction | int) -> str:
    return str(Fraction(x))


def _point(p: PointData) -> dict[str, Any]:
    return {
        "point": p.label,
        "count": p.count,
        "pole_order": p.multiplicity,
        "beta": q(p.beta),
        "delta": str(p.delta),
        "tau": format_tau(p.beta),
        "eset": list(p.eset),
    }


def profile_dict(p: SingularityProfile) -> dict[str, Any]:
    out: dict[str, Any] = {
        "fuchsian": p.fuchsian,
        "supported": p.supported,
        "reason": p.reason,
        "points": [_point(pt) for pt in p.points],
    }
    if p.infinity is not None:
        out["infinity"] = _point(p.infinity)
        out["singular_count"] = p.singular_count
    return out


def verdict_dict(v: Verdict) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": v.kind, "reason": v.reason}
    if v.profile is not None and v.profile.fuchsian and v.profile.supported:
        out["case1"] = {
            "exponents": [
                {"point": pt.label, "plus": str(m.plus), "minus": str(m.minus), "rule": m.rule}
                for pt, m in [(pt, modified_exponents(pt)) for pt in v.profile.points]
                + ([(v.profile.infinity, modified_exponents(v.profile.infinity, True))] if v.profile.infinity else [])
            ],
            "witnesses": [
                {"plus_counts": list(w.plus_counts), "infinity": w.infinity_sign, "d": w.d} for w in v.case1
            ],
            "excluded": not v.case1,
        }
        out["case3"] = {"excluded": not v.case3}
    if v.esets is not None:
        out["case2"] = {
            "esets": [list(e) for e in v.esets.finite],
            "eset_infinity": list(v.esets.infinity),
            "counts": {str(d): {"ordered": c[0], "types": c[1]} for d, c in v.counts.items()},
            "searches": len(v.ledger),
            "inconsistent": sum(1 for r in v.ledger if not r.found),
            "ledger": [
                {
                    "d": r.assignment.d,
                    "e": [list(g) for g in r.assignment.per_root],
                    "e_inf": r.assignment.e_inf,
                    "outcome": "P found" if r.found else "inconsistent",
                    "method": r.method,
                    "P": r.P,
                }
                for r in v.ledger
            ],
        }
    if v.assignment is not None:
        out["P"] = v.P
        out["assignment"] = str(v.assignment)
    return out


@dataclass
class Report:
    command: str
    inputs: dict[str, Any]
    nve: NVECoefficients | None = None
    normal_form: NormalFormODE | None = None
    verdict: Verdict | None = None
    extra: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    timing: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema": SCHEMA,
            "tool": {"name": "geogalois", "version": __version__},
            "command": self.command,
            "input": self.inputs,
        }
        if self.nve is not None:
            out["nve"] = {"a": str(self.nve.a), "b": str(self.nve.b)}
        if self.normal_form is not None:
            out["r"] = str(self.normal_form.r)
        if self.verdict is not None:
            if self.verdict.profile is not None:
                out["singularities"] = profile_dict(self.verdict.profile)
            out["verdict"] = verdict_dict(self.verdict)
        out.update(self.extra)
        out["notes"] = list(self.notes)
        out["timing_seconds"] = round(self.timing, 3)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render(self) -> str:
        """Plain-text table for the terminal."""
        d = self.to_dict()
        lines = [f"geogalois {self.command}"]
        for k, v in self.inputs.items():
            lines.append(f"  {k}: {v}")
        if "nve" in d:
            lines.append(f"NVE: xi'' + a xi' + b xi = 0 with a = {d['nve']['a']}, b = {d['nve']['b']}")
        if "r" in d:
            lines.append(f"normal form: w'' = r w, r = {d['r']}")
        sing = d.get("singularities")
        if sing and sing.get("points"):
            lines.append("singular points:")
            rows = sing["points"] + ([sing["infinity"]] if "infinity" in sing else [])
            for p in rows:
                lines.append(
                    f"  {p['point']:<28} x{p['count']:<3} beta={p['beta']:<8} tau={p['tau']:<24} E={p['eset']}"
                )
            if "singular_count" in sing:
                lines.append(f"  regular singular points (with infinity): {sing['singular_count']}")
        v = d.get("verdict")
        if v:
            if "case1" in v:
                lines.append(f"case I excluded: {v['case1']['excluded']}")
                lines.append(f"case III excluded: {v['case3']['excluded']}")
            if "case2" in v:
                c2 = v["case2"]
                counts = ", ".join(f"d={k}: {c['ordered']}" for k, c in c2["counts"].items()) or "none"
                lines.append(f"case II assignments: {counts}")
                lines.append(f"case II searches inconsistent: {c2['inconsistent']}/{c2['searches']}")
            if "P" in v:
                lines.append(f"P = {v['P']} for {v['assignment']}")
            lines.append(f"verdict: {v['kind']} ({v['reason']})")
        for k, val in self.extra.items():
            lines.append(f"{k}: {val}")
        for n in self.notes:
            lines.append(f"note: {n}")
        lines.append(f"time: {self.timing:.2f} s")
        return "\n".join(lines) + "\n"


def strip_timing(text: str) -> str:
    """JSON text with the timing field removed, for determinism comparisons."""
    d = json.loads(text)
    d.pop("timing_seconds", None)
    return json.dumps(d, indent=2, sort_keys=True)
