import csv
import json
import os

import numpy as np
import pytest

from qglandscape import build_case_study, parse_spec
from qglandscape.archive import load_eigen_archive, read_envelope_csv, save_eigen_archive
from qglandscape.cli import main
from qglandscape.exceptions import GridMismatch
from qglandscape.specfile import GraphSpec


def run(capsys, *argv):
    code = main(list(map(str, argv)))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    assert main(["solve", "mathieu-circle", "q=10", "k=2", "--out", str(out)]) == 0
    return out


def test_solve_writes_archive(solved):
    names = sorted(os.listdir(solved))
    assert names == ["eigenfunctions.csv", "eigenvalues.csv", "graph.qg", "manifest.json"]
    man = json.loads((solved / "manifest.json").read_text())
    assert man["solver"]["k"] == 2
    assert man["energies"][0] == pytest.approx(6.06302, abs=1e-4)
    spec, pairs = load_eigen_archive(solved)
    assert len(pairs) == 2 and spec.graph.m == 1
    assert pairs[0].norm_sq() == pytest.approx(1.0, abs=1e-9)


def test_solve_is_reproducible(tmp_path, solved):
    assert main(["solve", "mathieu-circle", "q=10", "k=2", "--out", str(tmp_path)]) == 0
    for name in os.listdir(solved):
        assert (tmp_path / name).read_bytes() == (solved / name).read_bytes()


def test_archive_round_trip(tmp_path, well):
    p = well.reference["eigenpair"]
    save_eigen_archive(tmp_path, GraphSpec(well.graph, well.potential), [p])
    spec, (q,) = load_eigen_archive(tmp_path)
    for e in well.graph.edges:
        for a, b in zip(p.samples[e.id], q.samples[e.id]):
            assert np.array_equal(a, b)
    assert q.energy == p.energy


@pytest.mark.parametrize("method", ["agmon", "torsion", "davies", "uniform", "auto"])
def test_bound_then_verify(tmp_path, capsys, solved, method):
    env = tmp_path / f"{method}.csv"
    code, out, err = run(capsys, "bound", "mathieu-circle", "q=10", "--method", method, "--eigen", solved,
                         "--index", 0, "--out", env)
    assert code == 0, err
    with open(env) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["edge", "s", "value", "method"] and len(rows) > 100
    assert (tmp_path / f"{method}.manifest.json").exists()
    code, out, _ = run(capsys, "verify", "mathieu-circle", "q=10", "--envelope", env, "--eigen", solved,
                       "--index", 0, "--report", tmp_path / "r.json")
    assert code == 0 and out.startswith("PASS")
    assert json.loads((tmp_path / "r.json").read_text())["results"][0]["pass"]


def test_verify_flags_a_shrunk_envelope(tmp_path, capsys, solved):
    env = tmp_path / "u.csv"
    assert main(["bound", "mathieu-circle", "q=10", "--method", "uniform", "--eigen", str(solved),
                 "--index", "0", "--out", str(env)]) == 0
    lines = env.read_text().splitlines()
    shrunk = [lines[0]] + [",".join(r.split(",")[:2] + ["0.01"] + r.split(",")[3:]) for r in lines[1:]]
    env.write_text("\n".join(shrunk) + "\n")
    code, out, _ = run(capsys, "verify", "mathieu-circle", "q=10", "--envelope", env, "--eigen", solved,
                       "--index", 0)
    assert code == 1 and "FAIL" in out and "PASS" not in out


def test_spec_file_target(tmp_path, capsys):
    code, text, _ = run(capsys, "spec", "square-well-star", "n=2", "M=10")
    assert code == 0
    path = tmp_path / "g.qg"
    path.write_text(text)
    assert parse_spec(text).graph.m == 4
    code, out, _ = run(capsys, "solve", path, "k=1", "--out", tmp_path / "o")
    assert code == 0
    assert float(out.split()[1]) == pytest.approx(build_case_study("square-well-star", n=2, M=10).reference[
        "truncated_root"], rel=1e-8)


def test_input_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.qg"
    bad.write_text("[vertices]\na\n[edges]\ne a a -1\n")
    assert run(capsys, "solve", bad)[0] == 2
    code, _, err = run(capsys, "solve", "no-such-case")
    assert code == 2 and "error" in err
    assert run(capsys, "solve", "mathieu-circle", "q")[0] == 2
    assert run(capsys, "bound", "mathieu-circle", "--method", "davies", "--energy", "50")[0] == 2
    assert run(capsys, "bound", "mathieu-circle", "--method", "davies", "--energy", "17.6")[0] == 2
    assert run(capsys, "bound", "mathieu-circle", "--method", "uniform", "--energy", "50",
               "--out", tmp_path / "u.csv")[0] == 0
    assert run(capsys, "solve", tmp_path / "missing.qg")[0] == 2


def test_config_from_environment(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"k": 1, "h": 0.05, "levels": 2}))
    monkeypatch.setenv("QGLAND_CONFIG", str(cfg))
    code, out, _ = run(capsys, "solve", "circle-free", "--out", tmp_path / "o")
    assert code == 0 and len(out.strip().splitlines()) == 1
    cfg.write_text(json.dumps({"colour": 1}))
    assert run(capsys, "solve", "circle-free")[0] == 2


def test_cases_lists_every_builder(capsys):
    code, out, _ = run(capsys, "cases")
    assert code == 0
    assert {line.split("\t")[0] for line in out.strip().splitlines()} >= {"mathieu-circle", "tetrahedron", "flower"}


def test_envelope_csv_grid_checks(tmp_path, mathieu):
    case, _ = mathieu
    p = tmp_path / "e.csv"
    p.write_text("edge,s,value,method\nc,0.0,1.0,x\nc,99.0,1.0,x\n")
    with pytest.raises(GridMismatch):
        read_envelope_csv(p, case.graph)
    p.write_text("edge,s,value,method\nz,0.0,1.0,x\n")
    with pytest.raises(GridMismatch):
        read_envelope_csv(p, case.graph)


def test_outputs_respect_the_umask(tmp_path):
    from qglandscape.archive import _UMASK, atomic_write
    atomic_write(tmp_path / "x.txt", "hi\n")
    assert (tmp_path / "x.txt").stat().st_mode & 0o777 == 0o666 & ~_UMASK
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]
