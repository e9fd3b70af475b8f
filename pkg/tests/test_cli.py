import csv
import io
import json
import math

import pytest

from conftest import tilted_pair
from weakctx.cli import parse_scenario, run
from weakctx.errors import ValidationError

Z_MATRIX = [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]


def scenario_dict(c2, sigma=None, pi=(1,)):
    psi, phi = tilted_pair(c2)
    data = {
        "dimension": 2,
        "psi": [[z.real, z.imag] for z in psi.amplitudes],
        "phi": [[z.real, z.imag] for z in phi.amplitudes],
        "pi": list(pi),
        "observable": Z_MATRIX,
    }
    if sigma is not None:
        data["sigma"] = sigma
    return data


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, data in {"zw2": scenario_dict(0.5, 10.0), "aav100": scenario_dict(0.01)}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(data))
        paths[name] = str(p)
    return paths


def invoke(*argv):
    buf = io.StringIO()
    code = run(list(argv), out=buf)
    return code, buf.getvalue()


def test_weakvalue(files):
    code, text = invoke("weakvalue", "--scenario", files["aav100"])
    assert code == 0
    report = json.loads(text)
    assert report["weak_value"][0] == pytest.approx(100.0, abs=1e-9)
    assert report["weak_value"][1] == 0.0
    assert report["anomaly"]["anomalous"]
    assert report["anomaly"]["witness_weak_value"][0] == pytest.approx(-49.5, abs=1e-9)


def test_check(files):
    code, text = invoke("check", "--scenario", files["zw2"], "--sigma", "10")
    report = json.loads(text)
    assert code == 0 and report["all_hold"] is True
    assert report["margins"][3] == pytest.approx(0.024994456395722827, abs=1e-10)


def test_measure(files):
    report = json.loads(invoke("measure", "--scenario", files["zw2"])[1])
    assert report["delta"] == pytest.approx(math.exp(-1 / 400))
    assert report["E_d_is_projector"] is True
    assert len(report["S"]) == 2 and len(report["S"][0][0]) == 2


def test_scan_csv(files):
    code, text = invoke("scan", "--scenario", files["zw2"], "--sigma-grid", "0.5,1,2,5,10,100")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["all_hold"] for r in rows] == ["false", "false", "true", "true", "true", "true"]
    assert float(rows[4]["margin"]) == pytest.approx(0.024994456395722827, abs=1e-10)


def test_scan_json(files):
    report = json.loads(invoke("scan", "--scenario", files["zw2"], "--sigma-grid", "1,2", "--format", "json")[1])
    assert report["sigma_threshold"] == 2.0


def test_bound(files):
    code, text = invoke("bound", "--scenario", files["zw2"], "--sigma", "10", "--bins", "200")
    report = json.loads(text)
    assert code == 0
    assert report["lp_optimum"] <= report["analytic_bound"]
    assert report["gap_to_quantum"] > 0.023
    cert = report["certificate"]
    assert len(cert["weights"]) == 4 and len(cert["responses"][0]) == 200


def test_sample_json_and_csv(files):
    code, text = invoke("sample", "--scenario", files["zw2"], "--n", "20000", "--seed", "5")
    report = json.loads(text)
    assert code == 0 and report["n"] == 20000
    est = report["p_minus"]
    assert abs(est["value"] - report["closed_form"]["p_minus"]) < 4 * est["std_error"]
    code, text = invoke("sample", "--scenario", files["zw2"], "--n", "10", "--format", "csv")
    assert text.splitlines()[0] == "x,passed" and len(text.splitlines()) == 11


def test_xcheck(files):
    report = json.loads(invoke("xcheck", "--scenario", files["zw2"], "--sigma", "1")[1])
    assert report["p_minus"]["residual"] <= 1e-9
    assert report["S_residual"] <= 1e-9
    assert report["povm_completeness_residual"] <= 1e-8


def test_byte_identical(files):
    for argv in (("sample", "--scenario", files["zw2"], "--n", "1000"), ("bound", "--scenario", files["zw2"], "--bins", "20")):
        assert invoke(*argv)[1] == invoke(*argv)[1]


def test_usage_errors(files, capsys):
    assert invoke("frobnicate")[0] == 1
    assert invoke("check", "--scenario", files["zw2"], "--bogus")[0] == 1
    assert invoke()[0] == 1
    assert "usage" in capsys.readouterr().err


def test_validation_errors(files, tmp_path):
    assert invoke("check", "--scenario", files["zw2"], "--sigma", "-1")[0] == 1
    assert invoke("check", "--scenario", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    data = scenario_dict(0.5, 10.0)
    data["pi"] = [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]
    bad.write_text(json.dumps(data))
    assert invoke("check", "--scenario", str(bad))[0] == 1
    assert invoke("check", "--scenario", files["aav100"])[0] == 1  # no sigma anywhere


def test_numerical_failure_exit_code(files):
    # an absurd quadrature tolerance exhausts the subdivision budget
    assert invoke("xcheck", "--scenario", files["zw2"], "--tol", "1e-40")[0] == 2


class TestScenarioParsing:
    def test_index_list_and_matrix_agree(self):
        a = parse_scenario(scenario_dict(0.5, pi=(1,)))
        data = scenario_dict(0.5)
        data["pi"] = [[0, 0], [0, 1]]
        b = parse_scenario(data)
        assert (a["pi"].matrix == b["pi"].matrix).all()

    def test_rejects_unnormalized(self):
        data = scenario_dict(0.5)
        data["psi"] = [[1, 0], [1, 0]]
        with pytest.raises(ValidationError):
            parse_scenario(data)

    def test_rejects_dimension_mismatch(self):
        data = scenario_dict(0.5)
        data["dimension"] = 3
        with pytest.raises(ValidationError):
            parse_scenario(data)

    @pytest.mark.parametrize("sigma", [0, -2.0, "ten"])
    def test_rejects_bad_sigma(self, sigma):
        data = scenario_dict(0.5, sigma)
        with pytest.raises(ValidationError):
            parse_scenario(data)
