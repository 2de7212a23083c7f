import json
from fractions import Fraction as Fr

import pytest

from helpers import CHAIN6_EDGES
from mrwtv import io as fio
from mrwtv.cli import run
from mrwtv.space import SpaceError


@pytest.fixture
def files(tmp_path):
    edges = tmp_path / "chain6.tsv"
    edges.write_text("# chain\n" + "".join(f"{a}\t{b}\t{w}\n" for a, b, w in CHAIN6_EDGES))
    chi = tmp_path / "chi12.csv"
    chi.write_text("state,value\n1,1\n2,1\n3,0\n4,0\n5,0\n6,0\n")
    zero = tmp_path / "zero.csv"
    zero.write_text("".join(f"{i},0\n" for i in range(1, 7)))
    om = tmp_path / "omega.txt"
    om.write_text("1\n2\n")
    return tmp_path, edges, chi, zero, om


def test_space_json_round_trip(chain6, tmp_path):
    path = tmp_path / "s.json"
    fio.save_space(chain6, path)
    back = fio.load_space(path)
    assert back.jump == chain6.jump and back.measure == chain6.measure and back.states == chain6.states
    fl = chain6.as_float()
    fio.save_space(fl, path)
    assert fio.load_space(path).jump == fl.jump


def test_function_and_set_round_trip(chain6, tmp_path):
    u = [Fr(1, 3), 0, Fr(-7, 2), 1, 2, Fr(5, 8)]
    fio.write_function(chain6, u, tmp_path / "u.csv")
    assert fio.read_function(tmp_path / "u.csv", chain6) == u
    fio.write_set(chain6, {0, 3}, tmp_path / "a.txt")
    assert fio.read_set(tmp_path / "a.txt", chain6) == {0, 3}
    (tmp_path / "bad.csv").write_text("1,0\n1,2\n")
    with pytest.raises(SpaceError):
        fio.read_function(tmp_path / "bad.csv", chain6)


def test_edge_list_and_point_cloud(files, tmp_path):
    _, edges, *_ = files
    S = fio.load_edge_space(edges)
    assert S.measure == (5, 11, 8, 3, 4, 3)
    pts = tmp_path / "p.tsv"
    pts.write_text("a\t0\t1\nb\t1\t1\nc\t2\t1\n")
    P = fio.load_point_cloud(pts, 1)
    assert P.measure == (2, 3, 2) and P.states == ("a", "b", "c")


def test_grid_config(tmp_path):
    cfg = tmp_path / "g.json"
    cfg.write_text(json.dumps({"domain": [[0, 1]], "cells_per_axis": 10, "kernel": {"type": "uniform", "radius": 0.25}}))
    assert fio.load_grid_config(cfg).n == 10


def test_dumps_deterministic():
    obj = {"b": [1.0, Fr(1, 3), float("inf")], "a": {"z": True, "y": None}}
    assert fio.dumps(obj) == fio.dumps(dict(reversed(list(obj.items()))))
    assert json.loads(fio.dumps(obj))["b"][1] == {"num": 1, "den": 3}


def test_cli_validate(files, capsys):
    _, edges, *_ = files
    assert run(["validate", "--edges", str(edges)]) == 0
    assert "ergodic=true" in capsys.readouterr().out


def test_cli_decompose_l1(files, capsys):
    _, edges, chi, *_ = files
    assert run(["decompose", "--p", "1", "--lambda", "2/5", "--signal", str(chi), "--edges", str(edges), "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [fio.from_json_number(v) for v in out["u"]] == [1, 1, 1, 0, 0, 0]
    assert out["certificate_ok"] and out["unique"]


def test_cli_decompose_l2_and_multiscale(files, capsys):
    _, edges, chi, *_ = files
    assert run(["decompose", "--p", "2", "--lambda", "1", "--signal", str(chi), "--edges", str(edges)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mean_in"] == out["mean_out"] and out["certificate_ok"]
    assert run(["decompose", "--p", "2", "--multiscale", "1,4", "--signal", str(chi), "--edges", str(edges)]) == 0
    capsys.readouterr()
    assert run(["decompose", "--p", "1", "--multiscale", "1,4", "--signal", str(chi), "--edges", str(edges)]) == 64


def test_cli_thresholds_and_analyze(files, capsys):
    _, edges, _, _, om = files
    assert run(["thresholds", "--set", str(om), "--edges", str(edges), "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lambda_omega"] == {"num": 1, "den": 2} and out["eigenpair"] is False
    assert run(["analyze", "--set", str(om), "--edges", str(edges)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert fio.from_json_number(out["perimeter"]) == 6 and out["calibrable"] is True


def test_cli_geo_solve(files, capsys):
    _, edges, _, _, om = files
    assert run(["geo-solve", "--set", str(om), "--lambda", "1/4", "--edges", str(edges)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["set"] == ["1", "2", "3", "4"] and out["energy"] == {"num": 15, "den": 4}


def test_cli_flow(files, capsys, tmp_path):
    _, edges, chi, zero, _ = files
    traj = tmp_path / "traj.csv"
    code = run(["flow", "--fidelity", "l1", "--lambda", "1", "--dt", "0.1", "--T", "20", "--v0", str(zero),
                "--signal", str(chi), "--edges", str(edges), "--trajectory", str(traj)])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["decay_ok"] and out["energy_monotone"]
    assert traj.read_text().splitlines()[0] == "t,1,2,3,4,5,6"


def test_cli_repro_and_errors(capsys, files):
    assert run(["repro", "chain6"]) == 0
    assert "ALL CHECKS PASS" in capsys.readouterr().out
    assert run(["repro", "chain6", "--w23", "7"]) == 3
    assert "expected" in capsys.readouterr().err
    assert run(["bogus"]) == 64
    assert run(["validate", "--edges", "/nonexistent/file"]) == 2
    assert run(["validate", "--points", str(files[1])]) == 64


def test_cli_output_is_deterministic(files, capsys, tmp_path):
    _, edges, chi, *_ = files
    outs = []
    for k in range(2):
        target = tmp_path / f"o{k}.json"
        run(["decompose", "--p", "2", "--lambda", "3/2", "--signal", str(chi), "--edges", str(edges),
             "--out", str(target), "--seed", "1"])
        outs.append(target.read_text())
    assert outs[0] == outs[1]
