import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from centralconf.fileio import (
    CochainFile,
    FileFormatError,
    ProblemFile,
    SolutionFile,
    SpectrumFile,
    emit,
    parse,
    read,
    write,
)

floats = st.floats(allow_nan=False, allow_infinity=False, width=64)


def _problem(**kw):
    base = dict(n=3, d=2, alpha=1.0, masses=[1.0, 2.0, 3.0], positions=[[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]])
    base.update(kw)
    return ProblemFile(**base)


def _solution():
    return SolutionFile(
        problem=_problem(),
        configuration=[[0.1, 0.2], [0.3, -0.1], [-0.2, 0.05]],
        lam=-0.1924500897298753,
        residual_norm=1.2e-15,
        morse_index=1,
        spectrum=[-0.5, 0.0, 1.0 / 3.0],
        classification=["planar", "equilateral"],
        method="newton",
        iterations=7,
        label="start-0",
        mass_scale=6.0,
    )


def test_problem_roundtrip():
    p = _problem()
    assert parse(emit(p)) == p


def test_solution_roundtrip_and_kind():
    s = _solution()
    text = emit(s)
    assert json.loads(text)["kind"] == "solution"
    assert "timing" not in json.loads(text)
    assert parse(text) == s
    assert text.endswith("\n")


def test_solution_timing_emitted_when_set():
    s = _solution()
    s.timing = 0.25
    assert json.loads(emit(s))["timing"] == 0.25


def test_spectrum_and_cochain_roundtrip():
    sp = SpectrumFile(
        "x.json",
        {"a": {"eigenvalues": [1.0, 2.0], "morseIndex": 0, "nullity": 0, "zeroThreshold": 1e-8}},
        [{"name": "radialEigenvalue", "passed": True}],
    )
    assert parse(emit(sp)) == sp
    cf = CochainFile(3, 1, [1.0, 1.0, 1.0], [[1.0], [2.0], [3.0]])
    assert parse(emit(cf)) == cf


@given(st.lists(st.lists(floats, min_size=2, max_size=2), min_size=3, max_size=3))
def test_floats_roundtrip_exactly(rows):
    p = _problem(positions=rows)
    back = parse(emit(p))
    assert back.positions == [[float(v) for v in r] for r in rows]


def test_emit_is_deterministic():
    assert emit(_solution()) == emit(_solution())


def test_key_order_fixed():
    keys = list(json.loads(emit(_problem())).keys())
    assert keys == ["kind", "n", "d", "alpha", "masses", "positions", "rngSeed", "settings"]


def test_bad_mass_reports_field_and_line():
    text = emit(_problem()).replace("2.0", "-2.0", 1)
    with pytest.raises(FileFormatError) as exc:
        parse(text)
    assert exc.value.field == "masses[1]"
    assert exc.value.line == 6
    assert "line 6" in str(exc.value)


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda o: o.update(n=1), "n"),
        (lambda o: o.update(d=0), "d"),
        (lambda o: o.update(alpha=-1.0), "alpha"),
        (lambda o: o.update(masses=[1.0, 2.0]), "masses"),
        (lambda o: o["positions"].__setitem__(1, [1.0]), "positions[1]"),
        (lambda o: o.pop("alpha"), "alpha"),
    ],
)
def test_problem_validation(mutate, field):
    obj = json.loads(emit(_problem()))
    mutate(obj)
    with pytest.raises(FileFormatError) as exc:
        parse(json.dumps(obj, indent=2))
    assert exc.value.field == field


def test_invalid_json_line():
    with pytest.raises(FileFormatError) as exc:
        parse('{\n  "kind": "problem",\n  "n": ,\n}')
    assert exc.value.line == 3


def test_unknown_kind():
    with pytest.raises(FileFormatError, match="unknown kind"):
        parse('{"kind": "banana"}')


def test_cochain_validation():
    with pytest.raises(FileFormatError):
        CochainFile(3, 1, [1.0, 1.0, 1.0], [[1.0], [2.0]])
    with pytest.raises(FileFormatError):
        CochainFile(3, 1, [1.0, 0.0, 1.0], [[1.0], [2.0], [3.0]])


def test_nan_rejected_on_emit():
    s = _solution()
    s.lam = float("nan")
    with pytest.raises(ValueError):
        emit(s)


def test_read_write(tmp_path):
    path = tmp_path / "s.json"
    write(_solution(), path)
    assert read(path) == _solution()
    assert np.array(read(path).configuration).shape == (3, 2)
