import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vofrac.cli import run
from vofrac.errors import FormatError, NonUniformGrid
from vofrac.fields import GridFunction
from vofrac.io import dumps_json, emit_grid_csv, ingest_csv, read_grid_csv


def cli(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def data_rows(csv_text):
    return [line for line in csv_text.splitlines() if not line.startswith("#")]


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-10, 10),
    st.floats(0.1, 10),
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=40),
)
def test_csv_round_trip_is_lossless(a, width, values):
    grid = GridFunction(a, a + width, np.array(values))
    back = read_grid_csv(emit_grid_csv(grid, comments=["made by a test"]))
    assert back.a == grid.a and back.b == grid.b
    np.testing.assert_array_equal(back.values, grid.values)
    np.testing.assert_array_equal(back.t, grid.t)


def test_ingest_file(tmp_path):
    path = tmp_path / "g.csv"
    grid = GridFunction.sample(np.exp, 0.0, 1.0, 9)
    emit_grid_csv(grid, path)
    np.testing.assert_array_equal(ingest_csv(path).values, grid.values)


def test_format_errors():
    with pytest.raises(FormatError) as info:
        read_grid_csv("x,y\n0,1\n1,2\n")
    assert info.value.line == 1
    with pytest.raises(NonUniformGrid):
        read_grid_csv("t,f\n0,1\n1,2\n3,4\n")
    with pytest.raises(FormatError):
        read_grid_csv("t,f\n0,1\n1,abc\n")


def test_json_writer_is_deterministic_and_valid():
    obj = {"b": [1.0, 0.1, float("nan")], "a": {"x": True, "y": None}, "n": 3}
    text = dumps_json(obj)
    assert text == dumps_json(obj)
    back = json.loads(text)
    assert back["b"] == [1.0, 0.1, None] and back["a"] == {"x": True, "y": None}


def test_differint_csv(capsys):
    code, out, err = cli(capsys, "differint", "--func", "t", "--dim", "0.5", "--t", "1")
    assert code == 0 and err == ""
    assert out.startswith("# config: ")
    rows = data_rows(out)
    assert rows[0] == "t,value,trust"
    assert float(rows[1].split(",")[1]) == pytest.approx(1.1283791671, rel=1e-8)


def test_differint_json_and_range(capsys):
    code, out, _ = cli(
        capsys, "differint", "--func", "exp(t)", "--dim", "0.3+0.1*t", "--a", "0", "--b", "2",
        "--t-range", "0.5", "1.5", "3", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert [r["t"] for r in payload["results"]] == [0.5, 1.0, 1.5]
    assert payload["config"]["dim"] == "0.3+0.1*t"


def test_identical_configs_give_identical_bytes(capsys):
    argv = ["differint", "--func", "t^2", "--dim", "0.4+0.2*t", "--a", "0", "--b", "2", "--t", "0.7", "1.3"]
    outs = [cli(capsys, *argv)[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_sampled_input(tmp_path, capsys):
    path = tmp_path / "f.csv"
    emit_grid_csv(GridFunction.sample(lambda s: s * s, 0.0, 2.0, 1025), path)
    code, out, _ = cli(capsys, "differint", "--func", f"@{path}", "--dim", "0.5", "--b", "2", "--t", "1")
    assert code == 0
    assert float(data_rows(out)[1].split(",")[1]) == pytest.approx(1.5045055561, rel=1e-3)


def test_compare_and_calibrate(capsys):
    code, out, _ = cli(capsys, "compare", "--func", "t", "--eps", "0.01", "--which", "below", "--window", "1", "2",
                       "--n-points", "1025")
    assert code == 0
    rep = json.loads(out)
    assert rep["max_rel_err"] < 0.02
    code, out, _ = cli(capsys, "calibrate", "--func", "t", "--dim", "0.99", "--which", "below", "--window", "1", "2",
                       "--n-points", "1025")
    assert code == 0
    assert json.loads(out)["alpha"] == pytest.approx(rep["alpha_used"], rel=1e-9)


def test_sweep_n_points(capsys):
    code, out, _ = cli(capsys, "sweep", "--vary", "n-points", "--values", "257", "513", "--func", "t",
                       "--dim", "0.5", "--t", "1")
    rows = data_rows(out)
    assert code == 0 and rows[0] == "axis,axis_value,quantity,value" and len(rows) == 3


def test_sweep_eps_scale(capsys):
    code, out, _ = cli(capsys, "sweep", "--vary", "eps-scale", "--values", "1", "0.5", "--func", "t",
                       "--eps", "0.02", "--which", "below", "--window", "1", "2", "--n-points", "513")
    assert code == 0 and len(data_rows(out)) == 5


def test_solve_and_strict(capsys):
    code, out, _ = cli(capsys, "solve", "--g", "1+t", "--d0", "0.4", "--kappa", "0.1", "--n-points", "129")
    assert code == 0
    assert "converged=true" in out
    code, _, err = cli(capsys, "solve", "--g", "1+t", "--d0", "0.4", "--kappa", "0.1", "--n-points", "129",
                       "--max-iter", "1", "--tol", "1e-14", "--strict")
    assert code == 3 and err.startswith("E:nonconvergence:")


@pytest.mark.parametrize(
    "argv, code, prefix",
    [
        (["differint", "--func", "sin(", "--dim", "0.5", "--t", "1"], 1, "E:parse:"),
        (["differint", "--func", "t", "--dim", "t", "--b", "2", "--t", "1"], 2, "E:band:"),
        (["differint", "--func", "t", "--dim", "0.5"], 1, "E:usage:"),
        (["differint", "--func", "t", "--dim", "1-1e-12", "--t", "1"], 2, "E:"),
        (["bogus"], 1, "E:usage:"),
        (["differint", "--func", "@/nonexistent.csv", "--dim", "0.5", "--t", "1"], 1, "E:"),
    ],
)
def test_exit_codes(capsys, argv, code, prefix):
    got, out, err = cli(capsys, *argv)
    assert got == code
    assert err.startswith(prefix) and err.count("\n") == 1
    assert out == ""


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "vofrac.cli", "differint", "--func", "t", "--dim", "0.5", "--t", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "t,value,trust" in proc.stdout
