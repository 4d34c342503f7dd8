import json

import numpy as np
import pytest

from centralconf import Masses, OneCochain, coboundary1
from centralconf.cli import main
from centralconf.fileio import CochainFile, ProblemFile, read, write


@pytest.fixture(autouse=True)
def _no_env_output(monkeypatch):
    monkeypatch.delenv("CENTRALCONF_OUTPUT_DIR", raising=False)


def _problem_file(tmp_path, positions, masses=None, name="p.json", **kw):
    n = len(positions)
    prob = ProblemFile(
        n=n, d=len(positions[0]), alpha=1.0, masses=masses or [1.0] * n, positions=positions, **kw
    )
    path = tmp_path / name
    write(prob, path)
    return str(path)


EQUILATERAL = [[0.0, 0.0], [1.0, 0.0], [0.5, 3.0**0.5 / 2.0]]


def test_solve_multistart_writes_solutions(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["solve", "--n", "3", "--d", "2", "--equal-masses", "--starts", "20", "--output", str(out)]) == 0
    files = sorted(out.glob("solution_*.json"))
    assert len(files) == 2
    sols = [read(f) for f in files]
    assert all(s.residual_norm <= 1e-11 for s in sols)
    assert {"equilateral" in s.classification for s in sols} == {True, False}
    assert "start-" in capsys.readouterr().err


def test_solve_to_stdout(capsys):
    assert main(["solve", "--n", "2", "--d", "1", "--starts", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "solution"


def test_solve_from_positions(tmp_path):
    path = _problem_file(tmp_path, [[0.0, 0.0], [1.0, 0.1], [0.4, 0.9]], masses=[1.0, 2.0, 3.0])
    out = tmp_path / "o"
    assert main(["solve", "--input", path, "--method", "variational", "--output", str(out)]) == 0
    (f,) = out.glob("solution_*.json")
    s = read(f)
    assert "equilateral" in s.classification
    assert s.problem.settings["method"] == "variational"
    assert s.mass_scale == 6.0


def test_solve_timing_flag(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", "--n", "2", "--d", "2", "--starts", "1", "--timing", "--output", str(out)]) == 0
    (f,) = out.glob("*.json")
    assert json.loads(f.read_text())["timing"] >= 0.0


def test_solve_csv(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", "--n", "3", "--d", "2", "--starts", "2", "--csv", "--output", str(out)]) == 0
    assert list(out.glob("*.csv"))


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("CENTRALCONF_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["solve", "--n", "2", "--d", "1", "--starts", "1"]) == 0
    assert list((tmp_path / "env").glob("solution_*.json"))


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--n", "3", "--masses", "1,0,2"],
        ["solve", "--n", "3", "--masses", "1,2"],
        ["solve", "--n", "3", "--masses", "1,x,2"],
        ["solve", "--n", "1"],
        ["verify", "/nonexistent/file.json"],
    ],
)
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_bad_file_reports_field(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "kind": "problem",\n  "n": 3,\n  "d": 2,\n  "alpha": 1.0,\n  "masses": [1.0, -1.0, 1.0]\n}\n')
    assert main(["solve", "--input", str(path)]) == 2
    err = capsys.readouterr().err
    assert "masses[1]" in err and "line 6" in err


def test_collision_exit_3(tmp_path):
    path = _problem_file(tmp_path, [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    assert main(["verify", path]) == 3
    assert main(["solve", "--input", path]) == 3


def test_no_convergence_exit_1(tmp_path):
    path = _problem_file(
        tmp_path,
        [[0.0, 0.0], [1.0, 0.1], [0.3, 0.9], [2.0, 1.0]],
        masses=[1.0, 2.0, 3.0, 4.0],
        settings={"maxIterations": 1},
    )
    assert main(["solve", "--input", path, "--method", "fixedPoint"]) == 1


def test_verify_pass_and_fail(tmp_path, capsys):
    good = _problem_file(tmp_path, EQUILATERAL, masses=[1.0, 2.0, 3.0], name="g.json")
    assert main(["verify", good]) == 0
    text = capsys.readouterr().out
    assert "zeroEquilateral" in text and "[PASS]" in text
    bad = _problem_file(tmp_path, [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]], name="b.json")
    assert main(["verify", bad]) == 4
    assert "FAIL" in capsys.readouterr().out


def test_verify_absolute_tolerance(tmp_path):
    good = _problem_file(tmp_path, EQUILATERAL)
    assert main(["verify", good, "--tol", "1e-12", "--abs-tol"]) == 0


def test_spectrum_gate_and_output(tmp_path, capsys):
    bad = _problem_file(tmp_path, [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]], name="b.json")
    assert main(["spectrum", bad]) == 4
    assert "refusing" in capsys.readouterr().err

    good = _problem_file(tmp_path, EQUILATERAL, name="g.json")
    out = tmp_path / "o"
    assert main(["spectrum", good, "--output", str(out), "--csv"]) == 0
    sp = read(out / "spectrum.json")
    assert set(sp.sections) == {"sphereRestricted", "fullHessianLambdaMinus2", "composedCochainHessian"}
    assert all(c["passed"] for c in sp.checks)
    assert sp.sections["sphereRestricted"]["nullity"] == 1
    assert len(list(out.glob("spectrum_*.csv"))) == 3


def test_moulton_counts(tmp_path):
    out = tmp_path / "o"
    assert main(["moulton", "--n", "4", "--masses", "1,2,3,4", "--output", str(out)]) == 0
    files = sorted(out.glob("moulton_*.json"))
    assert len(files) == 12
    for f in files:
        s = read(f)
        assert s.problem.d == 1
        assert "collinear" in s.classification


@pytest.mark.parametrize("name,extra", [("lagrange", ["--masses", "1,2,3"]), ("euler", []), ("square", []),
                                        ("ngon", ["--n", "5"]), ("pyramid", ["--n", "5"])])
def test_gallery(tmp_path, name, extra):
    out = tmp_path / "o"
    assert main(["gallery", name, *extra, "--output", str(out)]) == 0
    prob = read(out / f"{name}_problem.json")
    sol = read(out / f"{name}_solution.json")
    assert prob.positions is not None
    assert sol.residual_norm <= 1e-10
    assert main(["verify", str(out / f"{name}_solution.json")]) == 0


def test_gallery_bad_masses_exit_2():
    assert main(["gallery", "ngon", "--n", "3", "--masses", "1,2,3"]) == 2


def test_project(tmp_path):
    rng = np.random.default_rng(0)
    src = tmp_path / "c.json"
    write(CochainFile(4, 2, [1.0, 2.0, 3.0, 4.0], rng.standard_normal((6, 2)).tolist()), src)
    out = tmp_path / "o"
    assert main(["project", str(src), "--output", str(out)]) == 0
    cf = read(out / "projected.json")
    z = OneCochain(np.array(cf.entries), 4)
    assert coboundary1(z).max_norm() <= 1e-12 * np.max(z.norms())
    assert Masses(cf.masses) == Masses([1.0, 2.0, 3.0, 4.0])


def test_project_rejects_wrong_kind(tmp_path):
    path = _problem_file(tmp_path, EQUILATERAL)
    assert main(["project", path]) == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "0.1.0" in capsys.readouterr().out
