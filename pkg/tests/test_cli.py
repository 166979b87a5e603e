import subprocess
import sys
from importlib import resources

import pytest

from frontline.cli import run
from frontline.core import serialize_timeline
from frontline.synthetic import ELIMINATED_T, bundled_match, make_synthetic_match

FAST = ["--grid", "48x48"]


@pytest.fixture(scope="module")
def match(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "match.txt"
    p.write_text(serialize_timeline(bundled_match()))
    return str(p)


def test_frame_happy_path(match, tmp_path, capsys):
    out = tmp_path / "demo"
    assert run(["frame", "--in", match, "--at", "60", "--out", str(out)] + FAST) == 0
    written = tmp_path / "demo_frame_60.svgx"
    assert written.exists()
    assert "<svg " in written.read_text()
    assert str(written) in capsys.readouterr().out


def test_negative_c_is_usage_error(match, tmp_path, capsys):
    assert run(["frame", "--in", match, "--c", "-5", "--out", str(tmp_path / "x")]) == 1
    assert "C must be positive" in capsys.readouterr().err
    assert not list(tmp_path.iterdir())


@pytest.mark.parametrize("argv", [
    ["frame"],
    ["frame", "--in", "m.txt", "--bogus"],
    ["explode", "--in", "m.txt"],
    ["frame", "--in", "m.txt", "--area-samples", "1000"],
    ["frame", "--in", "m.txt", "--grid", "1x5"],
    ["frame", "--in", "m.txt", "--weight", "kernel-map"],
    ["frame", "--in", "m.txt", "--levels", "0.75,-1"],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err.startswith("frontline: ")


def test_missing_input_file(tmp_path):
    assert run(["frame", "--in", str(tmp_path / "nope.txt")]) == 1


def test_kernel_map_needs_rbf(match, tmp_path):
    wm = tmp_path / "w.grid"
    wm.write_text("bounds 0 0 1000 1000\ngrid 2 2\n1 1\n1 1\n")
    argv = ["frame", "--in", match, "--kernel", "poly", "--weight", f"kernel-map={wm}",
            "--out", str(tmp_path / "k")]
    assert run(argv) == 1


def test_weight_map_with_negative_value_is_data_error(match, tmp_path, capsys):
    wm = tmp_path / "w.grid"
    wm.write_text("bounds 0 0 1000 1000\ngrid 2 2\n1 -1\n1 1\n")
    assert run(["frame", "--in", match, "--weight", f"map={wm}"]) == 2
    assert "negative weight" in capsys.readouterr().err


def test_malformed_input_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("bounds 0 0 10 10\nframe 1 a,0,1,1,1,1,x\nframe 0 a,0,1,1,1,1,x\n")
    assert run(["frame", "--in", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_single_team_frame_is_data_error(match, tmp_path, capsys):
    assert run(["frame", "--in", match, "--at", "110", "--out", str(tmp_path / "d")] + FAST) == 2
    assert "t=110: single team" in capsys.readouterr().err


def test_series_rows_and_key_moment(match, tmp_path):
    prefix = tmp_path / "demo"
    assert run(["series", "--in", match, "--out", str(prefix), "--grid", "8x8"]) == 0
    lines = (tmp_path / "demo_series.csv").read_text().splitlines()
    assert lines[0] == "t,team0,team1"
    assert lines[-1].startswith("# key_moment ")
    rows = [ln.split(",") for ln in lines[1:-1]]
    times = [float(r[0]) for r in rows]
    assert times == [float(t) for t in range(int(ELIMINATED_T))]
    for _, a, b in rows:
        assert abs(float(a) + float(b) - 1.0) < 2e-6
    assert abs(float(lines[-1].split()[-1]) - 60.0) <= 4.0


def test_byte_identical_reruns(match, tmp_path):
    outs = []
    for k in range(2):
        prefix = tmp_path / f"run{k}"
        assert run(["frame", "--in", match, "--at", "30", "--out", str(prefix),
                    "--influence-ramp"] + FAST) == 0
        outs.append((tmp_path / f"run{k}_frame_30.svgx").read_bytes())
    assert outs[0] == outs[1]


def test_influence_export(match, tmp_path):
    from frontline.core import parse_grid_values
    assert run(["influence", "--in", match, "--at", "12", "--out", str(tmp_path / "i"),
                "--grid", "20x10"]) == 0
    bounds, values = parse_grid_values((tmp_path / "i_influence_12.grid").read_text())
    assert values.shape == (10, 20)
    assert (bounds.max_x, bounds.max_y) == (1000.0, 1000.0)


def test_custom_extension(match, tmp_path):
    assert run(["frame", "--in", match, "--at", "5", "--ext", "svg", "--out",
                str(tmp_path / "e")] + FAST) == 0
    assert (tmp_path / "e_frame_5.svg").exists()


def test_bundled_data_matches_generator():
    text = resources.files("frontline").joinpath("data/synthetic_match.txt").read_text("utf-8")
    assert text == serialize_timeline(make_synthetic_match())


def test_module_entry_point(match, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "frontline.cli", "frame", "--in", match,
                           "--c", "0"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "C must be positive" in proc.stderr
