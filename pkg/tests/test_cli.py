import csv
import json

import pytest

from chebpade import cli
from chebpade.verify import Check

TRI = "0,0;0,1;0.4,0.3"


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def test_chebotarev(tmp_path, capsys):
    assert run(tmp_path, "chebotarev", "--digits", "30") == 0
    out = json.loads((tmp_path / "chebotarev.json").read_text())
    assert out["config"]["triple"] == "equilateral"
    assert "mpmath" in out["versions"]
    assert abs(sum(out["chebotarev"]["weights"]) - 1) < 1e-12
    assert "0.333333333333" in capsys.readouterr().out
    with open(tmp_path / "arcs.csv") as fh:
        assert next(csv.reader(fh)) == ["k", "t", "re", "im"]


def test_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli.main(["chebotarev", "--triple", TRI, "--digits", "30", "--out", str(d)]) == 0
    assert (a / "chebotarev.json").read_bytes() == (b / "chebotarev.json").read_bytes()
    assert (a / "arcs.csv").read_bytes() == (b / "arcs.csv").read_bytes()


def test_trace(tmp_path):
    assert run(tmp_path, "trace", "--triple", TRI, "--digits", "30") == 0
    rows = json.loads((tmp_path / "trace.json").read_text())["arcs"]
    assert sorted(r["arc"] for r in rows) == [1, 2, 3]
    assert all(r["trajectory_residual"] < 1e-6 for r in rows)


def test_collinear_exit_code(tmp_path, capsys):
    assert run(tmp_path, "chebotarev", "--triple", "0,0;1,0;2,0", "--digits", "30") == 2
    assert "non-collinear required" in capsys.readouterr().err


def test_bad_triple_text(tmp_path):
    assert run(tmp_path, "chebotarev", "--triple", "0,0;1,0", "--digits", "30") == 2


def test_low_digits_rejected(tmp_path):
    with pytest.raises(SystemExit):
        run(tmp_path, "chebotarev", "--digits", "10")


def test_precision_error_code(tmp_path, monkeypatch):
    from chebpade.errors import PrecisionError

    def boom(args, out):
        raise PrecisionError("schedule exhausted")

    monkeypatch.setitem(cli.COMMANDS, "pade", boom)
    assert run(tmp_path, "pade") == 4


def test_pade(tmp_path):
    assert run(tmp_path, "pade", "--n-range", "3..4", "--digits", "50") == 0
    p4 = json.loads((tmp_path / "pade_4.json").read_text())
    assert p4["approximant"]["defect"] == 1
    with open(tmp_path / "poles.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert sum(1 for r in rows if r["n"] == "3") == 3
    assert sum(1 for r in rows if r["n"] == "4") == 3
    with open(tmp_path / "errors.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and set(rows[0]) == {"n", "re_z", "im_z", "abs_error", "orthogonality_residual"}


def test_pade_generic_poles(tmp_path):
    assert run(tmp_path, "pade", "--triple", TRI, "--n", "5", "--digits", "50") == 0
    with open(tmp_path / "poles.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 5


def test_pade_kappa_constants(tmp_path):
    args = ["pade", "--triple", TRI, "--n", "2", "--digits", "50", "--density", "analytic:exp"]
    got = {}
    for k in ("2", "3"):
        assert cli.main([*args, "--kappa", k, "--out", str(tmp_path / k)]) == 0
        got[k] = json.loads((tmp_path / k / "pade_2.json").read_text())
    # the approximant does not depend on κ, the Szegő normalization does
    assert got["2"]["approximant"] == got["3"]["approximant"]
    assert got["2"]["szego"]["gamma"] != got["3"]["szego"]["gamma"]


def test_predict(tmp_path):
    assert run(tmp_path, "predict", "--triple", TRI, "--n-range", "5..8", "--digits", "50") == 0
    payload = json.loads((tmp_path / "predict.json").read_text())["spurious"]
    assert [r["n"] for r in payload["records"]] == [5, 6, 7, 8]
    assert (tmp_path / "distance.csv").exists()


def test_orbit_rational(tmp_path, capsys):
    assert run(tmp_path, "orbit", "--weights", "1/2,1/3,1/6", "--N", "200", "--digits", "30") == 0
    assert "finite, period 6" in capsys.readouterr().out
    rep = json.loads((tmp_path / "orbit.json").read_text())["orbit"]
    assert rep["classification"] == "finite" and rep["period"] == 6


def test_orbit_from_triple(tmp_path):
    assert run(tmp_path, "orbit", "--N", "300", "--digits", "30") == 0
    rep = json.loads((tmp_path / "orbit.json").read_text())["orbit"]
    assert rep["classification"] == "finite" and rep["period"] == 3


def test_verify_wiring(tmp_path, monkeypatch):
    import chebpade.verify as verify

    fake = [Check(1, "a", True, "fine", 0.0), Check(2, "b", False, "broken", 0.0)]
    monkeypatch.setattr(verify, "run_all", lambda scale, echo=None, only=None, seed=0: fake)
    assert run(tmp_path, "verify") == 1
    rows = json.loads((tmp_path / "verify.json").read_text())["checks"]
    assert [r["ok"] for r in rows] == [True, False]


def test_parse_range():
    assert cli.parse_range("2..5") == range(2, 6)
    with pytest.raises(Exception):
        cli.parse_range("5..2")


def test_env_default_digits(monkeypatch):
    monkeypatch.setenv("CHEBPADE_DIGITS", "77")
    args = cli.build_parser().parse_args(["chebotarev"])
    assert args.digits == 77
