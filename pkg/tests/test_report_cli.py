import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from suptail import report
from suptail.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def _write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return p


def _rows(out_dir, stem):
    import csv
    with open(out_dir / f"{stem}.csv") as fh:
        return list(csv.DictReader(fh))


def test_tail_scenario_gives_quarter(tmp_path):
    p = _write(tmp_path, {"kind": "tail", "name": "q", "params": {
        "instance": {"singletons": 4}, "n": 2, "u": 2, "method": "exact"}})
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o", "q")
    assert rows[0]["lhs"] == "1/4" and rows[0]["method"] == "exact-dp"


def test_malformed_key_exits_two(tmp_path, capsys):
    p = _write(tmp_path, {"kind": "tail", "params": {"instance": {"singletons": 4},
                                                      "n": 2, "u": 2, "typo": 1}})
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2
    assert "typo" in capsys.readouterr().out


@pytest.mark.parametrize("text,needle", [
    ('{"kind": "tail",\n "params": ', "line 2"),
    ('{"kind": "nope", "params": {}}', "kind"),
    ('{"kind": "tail", "params": {"instance": {"singletons": 4, "subsets": {"N": 2, "L": 1}}, "n": 1, "u": 1}}', "instance"),
    ('{"kind": "tail", "params": {"instance": {"table": [[2]]}, "n": 1, "u": 1}}', "[0, 1]"),
    ('{"kind": "halving", "params": {"rho": "abc"}}', "rho"),
])
def test_input_errors_exit_two(tmp_path, capsys, text, needle):
    p = _write(tmp_path, text)
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2
    assert needle in capsys.readouterr().out


def test_missing_file_exits_two(tmp_path):
    assert main(["run", str(tmp_path / "absent.json")]) == 2


def test_assertion_failure_exits_one(tmp_path, monkeypatch):
    p = _write(tmp_path, {"kind": "tail", "name": "f", "params": {
        "instance": {"singletons": 4}, "n": 2, "u": 2, "method": "exact"}})
    real = report.tail_exact.enumerate_sup_tail
    monkeypatch.setattr(report.tail_exact, "enumerate_sup_tail",
                        lambda *a, **k: real(*a, **k) + Fraction(1, 1000))
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 1
    payload = json.loads((tmp_path / "o" / "f.json").read_text())
    assert payload["assert_failures"] == 1 and payload["exit_code"] == 1


def test_report_rows_never_fail_the_run(tmp_path):
    # the boundary halving scenario has failing chain steps, all report-class
    assert main(["run", str(SCENARIOS / "halving_boundary.json"), "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path, "halving_boundary")
    assert any(r["holds"] == "false" and r["class"] == "report" for r in rows)
    assert all(r["holds"] == "true" for r in rows if r["class"] == "assert")


def test_full_report_in_regime_row(tmp_path):
    assert main(["run", str(SCENARIOS / "full_report_in_regime.json"), "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path, "full_report_in_regime")
    bp = [r for r in rows if r["check"] == "mu(B_p) <= 2D rho^(p/4)"]
    assert len(bp) == 1
    assert bp[0]["in_regime"] == "true" and bp[0]["class"] == "assert" and bp[0]["holds"] == "true"
    assert float(bp[0]["margin_log10"]) > 0


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.json")), ids=lambda p: p.stem)
def test_bundled_scenarios_pass(tmp_path, path):
    assert main(["run", str(path), "--out", str(tmp_path)]) == 0


def test_outputs_identical_across_workers_and_runs(tmp_path):
    scen = str(SCENARIOS / "tail_four_singletons.json")
    outs = []
    for i, w in enumerate((1, 2, 8, 1)):
        d = tmp_path / f"o{i}"
        assert main(["run", scen, "--workers", str(w), "--out", str(d)]) == 0
        outs.append(((d / "tail_four_singletons.csv").read_bytes(),
                     (d / "tail_four_singletons.json").read_bytes()))
    assert len(set(outs)) == 1


def test_seed_override_changes_mc_rows(tmp_path):
    scen = str(SCENARIOS / "tail_four_singletons.json")
    main(["run", scen, "--out", str(tmp_path / "a")])
    main(["run", scen, "--seed", "12345", "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "tail_four_singletons.csv").read_text()
    b = (tmp_path / "b" / "tail_four_singletons.csv").read_text()
    assert a != b and "seed=12345" in b


def test_emit_summary_shapes(tmp_path):
    text = report.emit_summary([], tmp_path, "empty")
    assert (tmp_path / "empty.csv").read_text() == ",".join(report.COLUMNS) + "\n"
    assert "0 rows" in text
    row = report.Row("bp", "x", "assert", "exact-dp", Fraction(1, 3), 0.5, True, 0.176, True)
    mc = report.Row("tail", "y", "report", "monte-carlo", 0.25)
    report.emit_summary([row, mc], tmp_path, "two")
    rows = _rows(tmp_path, "two")
    assert rows[0]["lhs"] == "1/3" and rows[0]["margin_log10"] == "0.17599999999999999"
    assert [r["method"] for r in rows] == ["exact-dp", "monte-carlo"]


def test_parse_rational_forms():
    assert report.parse_rational("2^-3") == Fraction(1, 8)
    assert report.parse_rational("3/7") == Fraction(3, 7)
    assert report.parse_rational(0.3) == Fraction(3, 10)
    with pytest.raises(report.ScenarioError):
        report.parse_rational("x/y")


def test_module_entry_point(tmp_path):
    p = _write(tmp_path, {"kind": "halving", "name": "h", "params": {"rho": "1/1000", "N0": 2048,
                                                                      "k_max": 1, "p": 0}})
    out = subprocess.run([sys.executable, "-m", "suptail", "run", str(p), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and (tmp_path / "h.csv").exists()
