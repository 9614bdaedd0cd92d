import csv
import json

import pytest

from geogalois.cli import main
from geogalois.report import strip_timing

XYZ_R = "-18*(2+3*y^6)/(y^2*(y^6+4)^2)"


@pytest.mark.parametrize(
    "argv, code",
    [
        (["analyze", "--f", "1/(x^2-y^2)"], 0),
        (["analyze", "--f", "x^2+y^2"], 2),
        (["analyze", "--f", "x+y"], 1),
        (["analyze", "--f", "x^(1/2)"], 1),
        (["analyze", "--f", "cos(2*x)*exp(-2*y^2)"], 1),
        (["kovacic", "--r", "0"], 2),
        (["kovacic", "--r", "1/y^3"], 2),
        (["kovacic", "--r", "x/y"], 1),
        (["family", "--n", "0"], 1),
        (["family", "--n", "1"], 0),
        (["pde-test", "--f", "x^2+y^2"], 0),
        (["pde-test", "--f", "1/(x^2-y^2)"], 0),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert main(argv + ["--quiet"]) == code


def test_json_report_contents(tmp_path):
    out = tmp_path / "r.json"
    assert main(["analyze", "--f", "1/(x^2-y^2)", "--json", str(out), "--quiet"]) == 0
    d = json.loads(out.read_text())
    assert d["schema"] == 1
    assert d["r"] == "(-54*y^6 - 36)/(y^14 + 8*y^8 + 16*y^2)"
    sing = d["singularities"]
    assert sing["singular_count"] == 8
    assert [p["beta"] for p in sing["points"]] == ["-9/4", "5/16"]
    assert sing["points"][0]["tau"] == "(1 ± i*sqrt(8))/2"
    assert sing["infinity"]["eset"] == [0, 2, 4]
    v = d["verdict"]
    assert v["kind"] == "NonIntegrable"
    assert {k: c["ordered"] for k, c in v["case2"]["counts"].items()} == {"0": 21, "1": 21, "2": 1, "3": 1, "4": 1}
    assert v["case2"]["inconsistent"] == 45


def test_kovacic_matches_analyze(tmp_path):
    a, k = tmp_path / "a.json", tmp_path / "k.json"
    main(["analyze", "--f", "1/(x^2-y^2)", "--json", str(a), "--quiet"])
    main(["kovacic", "--r", XYZ_R, "--json", str(k), "--quiet"])
    da, dk = json.loads(a.read_text()), json.loads(k.read_text())
    assert da["verdict"] == dk["verdict"]
    assert da["singularities"] == dk["singularities"]


def test_report_deterministic_across_threads(tmp_path, monkeypatch):
    texts = []
    for threads in ("1", "3"):
        out = tmp_path / f"t{threads}.json"
        main(["analyze", "--f", "1/(x^2-y^2)", "--threads", threads, "--json", str(out), "--quiet"])
        texts.append(strip_timing(out.read_text()))
    monkeypatch.setenv("GG_THREADS", "2")
    out = tmp_path / "env.json"
    main(["analyze", "--f", "1/(x^2-y^2)", "--json", str(out), "--quiet"])
    texts.append(strip_timing(out.read_text()))
    assert texts[0] == texts[1] == texts[2]


def test_family_note_and_closed_form(tmp_path):
    out = tmp_path / "f.json"
    assert main(["family", "--n", "1", "--json", str(out), "--quiet"]) == 0
    d = json.loads(out.read_text())
    assert d["closed_form_matches"] is True
    assert d["notes"]


def test_pde_report(tmp_path, capsys):
    out = tmp_path / "p.json"
    main(["pde-test", "--f", "1/(x^2-y^2)", "--json", str(out)])
    d = json.loads(out.read_text())
    assert d["pde"] == {"status": "fail", "mode": "exact", "residual": "-4/y^3"}
    assert "fail" in capsys.readouterr().out


def test_geodesic_csv(tmp_path):
    csv_path, js = tmp_path / "g.csv", tmp_path / "g.json"
    code = main(
        ["geodesic", "--F", "x*y*z", "--c", "1", "--start", "1,1,1", "--dir", "random",
         "--length", "5", "--step", "1e-3", "--out", str(csv_path), "--json", str(js), "--quiet"]
    )
    assert code == 0
    rows = list(csv.DictReader(csv_path.open()))
    assert len(rows) == 5001
    assert max(float(r["F_drift"]) for r in rows) < 1e-8
    assert max(float(r["speed_drift"]) for r in rows) < 1e-8
    assert json.loads(js.read_text())["trajectory"]["fault"] is None


def test_geodesic_bad_start():
    assert main(["geodesic", "--F", "x*y*z", "--c", "1", "--start", "1,1,2", "--quiet"]) == 1
    assert main(["geodesic", "--F", "x*y*z", "--c", "1", "--start", "1,1", "--quiet"]) == 1


def test_error_json(tmp_path):
    out = tmp_path / "e.json"
    assert main(["analyze", "--f", "x+y", "--json", str(out)]) == 1
    d = json.loads(out.read_text())
    assert d["error"] == "geogalois.nve.SymmetryViolated"
