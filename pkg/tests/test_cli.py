import json
import re

import pytest

from rislab.cli import main, parse_pattern_source
from rislab.pattern import random_pattern, stripes

CLOCK = "2024-05-01T12:00:00Z"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_encode(capsys):
    assert run(capsys, "encode", "uniform:off") == (0, "!0X" + "0" * 64 + "\n", "")
    assert run(capsys, "encode", "uniform:on")[1].strip() == "!0X" + "F" * 64
    a, b = run(capsys, "encode", "random:42"), run(capsys, "encode", "random:42")
    assert a == b and a[0] == 0


def test_encode_grid_file(capsys, tmp_path):
    p = random_pattern(9)
    path = tmp_path / "grid.txt"
    p.save(path)
    code, out, _ = run(capsys, "encode", str(path))
    assert code == 0 and out.strip() == run(capsys, "encode", "random:9")[1].strip()


def test_encode_malformed_grid(capsys, tmp_path):
    path = tmp_path / "short.txt"
    path.write_text("0" * 16 + "\n" * 1 + ("0" * 16 + "\n") * 14)
    code, out, err = run(capsys, "encode", str(path))
    assert code == 1 and out == "" and "16 lines" in err


@pytest.mark.parametrize("spec", ["uniform:maybe", "stripes:d:2", "stripes:v:0", "checker:x", "nosuchfile.txt", "single:3"])
def test_encode_bad_spec(capsys, spec):
    code, _, err = run(capsys, "encode", spec)
    assert code == 2 and "error" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])
    assert exc.value.code == 2


def test_decode(capsys):
    code, out, _ = run(capsys, "decode", "!0X8" + "0" * 63)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "1" + "0" * 15 and len(lines) == 16
    assert run(capsys, "decode", "!0Y" + "0" * 64)[0] == 1


def test_pattern_sources():
    assert parse_pattern_source("stripes:h:2")[1] == stripes("horizontal", 2)
    assert parse_pattern_source("stripes:v:4:0")[1] == stripes("vertical", 4, 0)
    assert parse_pattern_source("random", seed=5) == ("random:5", random_pattern(5))
    assert parse_pattern_source("single:0,0")[1][0, 0] == 1
    cs = "!0X" + "a" * 64
    assert parse_pattern_source(cs)[0] == cs.upper()


def test_simulate_2d(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "2d", "uniform:on", "--out", str(tmp_path), "--fixed-clock", CLOCK)
    assert code == 0
    lines = (tmp_path / "records.csv").read_text().splitlines()
    assert len(lines) == 102
    assert "azimuth 90.0 deg" in out
    assert (tmp_path / "polar_uniform-on.csv").read_text().count("\n") == 102
    svg = (tmp_path / "polar_uniform-on.svg").read_text()
    assert len(re.search(r'class="data"[^>]*points="([^"]*)"', svg).group(1).split()) == 101
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["patterns"] == [{"id": "uniform:on", "control_string": "!0X" + "F" * 64}]


def test_simulate_six_patterns(capsys, tmp_path):
    specs = ["uniform:off", "uniform:on", "stripes:v:2", "stripes:h:2", "random:5", "checker:4"]
    code, out, _ = run(capsys, "simulate", "2d", *specs, "--out", str(tmp_path))
    assert code == 0
    assert len((tmp_path / "records.csv").read_text().splitlines()) == 1 + 606
    assert out.count("peak") == 6


def test_simulate_3d_heatmap(capsys, tmp_path):
    code, _, _ = run(capsys, "simulate", "3d", "stripes:h:2", "--out", str(tmp_path), "--fixed-clock", CLOCK)
    assert code == 0
    rows = [r.split(",") for r in (tmp_path / "heatmap_stripes-h-2.csv").read_text().splitlines()]
    assert len(rows) == 8 and all(len(r) == 102 for r in rows)
    assert len((tmp_path / "records.csv").read_text().splitlines()) == 1 + 707


def test_simulate_scene_flags(capsys, tmp_path):
    scene_file = tmp_path / "lab.cfg"
    scene_file.write_text("antenna_offset=1.5\nstandoff=1.5\n")
    code, out, _ = run(
        capsys, "simulate", "2d", "uniform:on", "--out", str(tmp_path / "o"), "--scene", str(scene_file),
        "--tx-power", "0", "--offset", "-3", "--spacing", "0.03",
    )
    assert code == 0
    m = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert m["scene"]["antenna_offset"] == 1.5 and m["scene"]["tx_power"] == 0.0
    assert m["scene"]["element_spacing"] == 0.03 and m["sim_config"]["power_offset"] == -3.0


def test_simulate_freq_resets_spacing(capsys, tmp_path):
    run(capsys, "simulate", "2d", "uniform:on", "--out", str(tmp_path), "--freq", "11e9")
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["scene"]["element_spacing"] == pytest.approx(299792458.0 / 11e9 / 2)


def test_simulate_unwritable(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "simulate", "2d", "uniform:on", "--out", str(blocker / "sub"))
    assert code == 1 and err


def test_codebook_build_and_query(capsys, tmp_path):
    cb = tmp_path / "cb.json"
    code, out, _ = run(capsys, "codebook", "build", "--targets", "2d", "--out", str(cb))
    assert code == 0 and "101 entries" in out
    assert len(json.loads(cb.read_text())["entries"]) == 101
    code, out, _ = run(capsys, "codebook", "query", "--codebook", str(cb), "--azimuth", "90")
    entry = json.loads(out)
    assert code == 0 and (entry["azimuth"], entry["elevation"]) == (90.0, 0.0)
    assert len(entry["control_string"]) == 67
    _, out, _ = run(capsys, "codebook", "query", "--codebook", str(cb), "--azimuth", "89.5")
    assert json.loads(out)["azimuth"] == 90.0


def test_codebook_custom_targets(capsys, tmp_path):
    cb = tmp_path / "cb.json"
    assert run(capsys, "codebook", "build", "--targets", "60,120,30,-9,9,9", "--out", str(cb))[0] == 0
    assert len(json.loads(cb.read_text())["entries"]) == 9
    assert run(capsys, "codebook", "build", "--targets", "60,x", "--out", str(cb))[0] == 2


def test_codebook_query_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "codebook", "query", "--codebook", str(tmp_path / "none.json"), "--azimuth", "90")
    assert code == 1 and err


def test_polar_svg_command(capsys, tmp_path):
    run(capsys, "simulate", "3d", "uniform:on", "--out", str(tmp_path), "--fixed-clock", CLOCK)
    rec = str(tmp_path / "records.csv")
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run(capsys, "polar-svg", rec, "--pattern", "uniform:on", "--out", str(a))[0] == 1  # several elevations
    assert run(capsys, "polar-svg", rec, "--pattern", "uniform:on", "--elevation", "9", "--out", str(a))[0] == 0
    assert run(capsys, "polar-svg", rec, "--pattern", "uniform:on", "--elevation", "9", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    pts = re.search(r'class="data"[^>]*points="([^"]*)"', a.read_text()).group(1).split()
    assert len(pts) == 101
    assert run(capsys, "polar-svg", rec, "--pattern", "missing", "--out", str(a))[0] == 1
