import json
from pathlib import Path

import pytest

from gleason.cli import main
from gleason.schemas import validate

DOMAINS = Path(__file__).resolve().parents[1] / "domains"


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_decompose_polynomial(tmp_path, capsys):
    assert run(tmp_path, "decompose", "--domain", "ball", "--f", "poly:z1^2", "--point", "0.3,0,0.2,0.1") == 0
    payload = json.loads((tmp_path / "decomposition.json").read_text())
    validate(payload, "decomposition")
    report = payload["reports"][0]
    assert report["status"] == "OK" and report["residual"] < 1e-7
    assert report["values"][0] == pytest.approx([0.3, 0.0], abs=1e-14)
    assert "closed_form" in capsys.readouterr().out


def test_decompose_rational_two_points(tmp_path):
    code = run(tmp_path, "decompose", "--domain", str(DOMAINS / "ball.json"), "--f", "quotient",
               "--point", "0.3,0,0.2,0", "--point", "0.95,0,0,0")
    assert code == 0
    methods = [r["method"] for r in json.loads((tmp_path / "decomposition.json").read_text())["reports"]]
    assert methods == ["direct_contour", "sy_system"]


@pytest.mark.parametrize("args", [
    ["decompose", "--domain", "ball", "--f", "poly:z1", "--point", "1.2,0,0,0"],
    ["decompose", "--domain", "ball", "--f", "poly:z1 +* z2", "--point", "0.1,0,0,0"],
    ["decompose", "--domain", "ball", "--f", "poly:z1", "--point", "0.1,0"],
    ["decompose", "--domain", "no_such_domain", "--f", "poly:z1", "--point", "0.1,0,0,0"],
    ["decompose", "--domain", "ball", "--f", "no_such_oracle", "--point", "0.1,0,0,0"],
])
def test_input_errors_exit_one(tmp_path, args):
    assert run(tmp_path, *args) == 1


def test_contract_violation_exits_two(tmp_path):
    code = run(tmp_path, "decompose", "--domain", "ball", "--f", "quotient", "--point", "0.3,0,0.2,0",
               "--method", "sy_system")
    assert code == 2


def test_check_domain_fail_is_data(tmp_path, capsys):
    assert run(tmp_path, "check-domain", "--domain", str(DOMAINS / "annulus_product.json"), "--lines", "20",
               "--resolution", "64") == 0
    payload = json.loads((tmp_path / "certificate.json").read_text())
    validate(payload, "certificate")
    assert payload["certificate"]["verdict"] == "FAIL"
    assert "witness" in capsys.readouterr().out
    assert (tmp_path / "lines.csv").read_text().startswith("line_id,a,b,connected,simply_connected,min_defect")


def test_lemma1_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["lemma1", "--domain", "ball", "--samples", "500", "--seed", "7", "--out", str(out)]) == 0
    assert (a / "lemma1.csv").read_bytes() == (b / "lemma1.csv").read_bytes()
    summary = json.loads((a / "summary.json").read_text())
    validate(summary, "summary")
    assert summary["violations"] == 0


def test_estimate_k_reproducible(tmp_path, monkeypatch):
    monkeypatch.setenv("GLEASON_THREADS", "2")
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["estimate-k", "--domain", "ball", "--degree", "3", "--trials", "4", "--seed", "3",
                     "--out", str(out)]) == 0
    assert (a / "k_table.csv").read_bytes() == (b / "k_table.csv").read_bytes()
    assert (a / "k_table.csv").read_text().splitlines()[0] == "degree,trial,ratio"


def test_continuity_command(tmp_path):
    assert run(tmp_path, "continuity", "--domain", "ball", "--f", "poly:z1*z2/2", "--point", "0.3,0,0.2,0") == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    validate(summary, "summary")
    assert summary["final_delta"] < 1e-4
    lines = (tmp_path / "continuity.csv").read_text().splitlines()
    assert lines[0] == "k,distance,delta_I,delta_T" and len(lines) == 11


def test_polynomial_json_function(tmp_path):
    spec = tmp_path / "p.json"
    spec.write_text(json.dumps({"n": 2, "terms": [{"alpha": [2, 0], "re": 1.0, "im": 0.0}]}))
    assert run(tmp_path, "decompose", "--domain", "ball", "--f", str(spec), "--point", "0.3,0,0.2,0") == 0
    report = json.loads((tmp_path / "decomposition.json").read_text())["reports"][0]
    assert report["values"][0] == pytest.approx([0.3, 0.0], abs=1e-14)
    spec.write_text(json.dumps({"n": 2, "terms": [{"alpha": "bad"}]}))
    assert run(tmp_path, "decompose", "--domain", "ball", "--f", str(spec), "--point", "0.3,0,0.2,0") == 1
