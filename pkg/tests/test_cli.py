import json
import os
from fractions import Fraction

import pytest

from cmheights.cli import main, parse_point
from cmheights.sampling import (
    ConfigError,
    ExperimentConfig,
    csv_text,
    run_sweep,
    sample_points,
)
from cmheights.elliptic import curve_from_a_invariants
from cmheights.numberfields import QQ, make_field
from cmheights.sampling import parse_curve


def test_sample_points_examples():
    E = curve_from_a_invariants(QQ, 0, 0, 0, -1, 0)
    cfg = ExperimentConfig(curves=("0;0;0;-1;0",), num_bound=3, den_bound=1)
    pts = sample_points(E, cfg)
    by_x = {}
    for P in pts:
        by_x[(P.x.coords[0], P.curve.field.descriptor())] = P
    # x=0 is the rational 2-torsion point
    assert (Fraction(0), "Q") in by_x
    # x=2 gives delta=6: a point over Q(sqrt 6)
    assert (Fraction(2), "Q(sqrt,6)") in by_x
    # deterministic ordering: sorted by (numerator, denominator)
    xs = [P.x.coords[0] for P in pts]
    assert xs == sorted(xs, key=lambda q: (q.numerator, q.denominator))


def test_sample_points_rational_point():
    E = curve_from_a_invariants(QQ, 0, 0, 0, -25, 0)
    cfg = ExperimentConfig(curves=("x",), num_bound=5, den_bound=1)
    pts = sample_points(E, cfg)
    rational = [P for P in pts if P.curve.field.kind == "rational"]
    assert any(P.x.coords[0] == -4 and P.y.coords[0] in (6, -6) for P in rational)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(curves=("cm13",), tolerance=Fraction(0))
    with pytest.raises(ConfigError):
        ExperimentConfig(curves=("cm13",), num_bound=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(curves=("cm13",), extension="cubic")


def test_sweep_deterministic_and_csv(tmp_path):
    cfg = ExperimentConfig(curves=("0;0;0;-1;0", "0;0;0;0;1"),
                           num_bound=3, den_bound=2,
                           tolerance=Fraction(1, 10 ** 6))
    res1 = run_sweep(cfg)
    res2 = run_sweep(cfg)
    assert csv_text(res1) == csv_text(res2)
    assert res1.inconsistent == 0 and res1.exit_code == 0
    lines = csv_text(res1).strip().split("\n")
    assert lines[0] == "curve,j,field,x,hhat_mid,hhat_rad,main_bound,verdict"
    assert len(lines) == len(res1.rows) + 1
    for row in res1.rows:
        assert row.verdict in ("consistent_nontorsion", "torsion_confirmed")


def test_sweep_empty_curves():
    cfg = ExperimentConfig(curves=())
    res = run_sweep(cfg)
    assert res.rows == () and res.exit_code == 0
    assert csv_text(res).strip() == "curve,j,field,x,hhat_mid,hhat_rad,main_bound,verdict"


def test_cli_bound_and_height(capsys):
    assert main(["bound", "--d", "1", "--j", "1728"]) == 0
    out = capsys.readouterr().out
    assert "p = 29" in out and "C1" in out
    assert main(["height", "--curve", "0;0;0;-25;0", "--point=-4,6",
                 "--method", "both"]) == 0
    out = capsys.readouterr().out
    assert out.count("hhat[") == 2


def test_cli_certify_torsion_galois_chain(tmp_path, capsys):
    out_path = os.path.join(tmp_path, "cert.json")
    assert main(["certify", "--curve", "0;0;0;0;1", "--point", "2,3",
                 "--no-chain", "--out", out_path]) == 0
    with open(out_path) as fh:
        cert = json.load(fh)
    assert cert["verdict"] == "torsion_confirmed"
    assert main(["torsion", "--curve", "0;0;0;0;1", "--point", "2,3"]) == 0
    assert "order 6" in capsys.readouterr().out
    assert main(["galois", "--disc", "-4", "--qprime", "3"]) == 0
    assert "|C(q')| = 8" in capsys.readouterr().out
    assert main(["chain", "--d", "1", "--j", "0"]) == 0


def test_cli_sweep(tmp_path, capsys):
    config = {
        "curves": ["0;0;0;-1;0"],
        "num_bound": 2,
        "den_bound": 1,
        "tolerance": "1/1000000",
        "csv_path": os.path.join(tmp_path, "sweep.csv"),
        "cert_dir": os.path.join(tmp_path, "certs"),
    }
    cfg_path = os.path.join(tmp_path, "config.json")
    with open(cfg_path, "w") as fh:
        json.dump(config, fh)
    assert main(["sweep", "--config", cfg_path]) == 0
    assert os.path.exists(config["csv_path"])
    certs = os.listdir(config["cert_dir"])
    assert certs and all(name.endswith(".json") for name in certs)


def test_cli_error_paths(capsys):
    assert main([]) == 2
    assert main(["height", "--curve", "0;0;0;0;0", "--point", "0,0"]) == 1
    err = capsys.readouterr().err
    assert "error" in err
    assert main(["height", "--curve", "0;0;0;-1;0", "--point", "5,5"]) == 1
    assert main(["sweep", "--config", "/nonexistent.json"]) == 1


def test_parse_point_formats():
    K = make_field("Q(sqrt,6)")
    E = parse_curve("0;0;0;-1;0", "Q(sqrt,6)")
    P = parse_point(E, "2,0;0,1")
    assert P.x.coords == (Fraction(2), Fraction(0))
    assert P.y.coords == (Fraction(0), Fraction(1))
    assert parse_point(E, "inf").is_infinity
    Eq = parse_curve("0;0;0;-1;0", "Q")
    P2 = parse_point(Eq, "0,0")
    assert P2.x.coords[0] == 0
