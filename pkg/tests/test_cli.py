import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from jcqed.cli import main, read_config
from jcqed.core import CoherentField, EvolutionParams, PureQubit
from jcqed.dynamics import bloch_evolve
from jcqed.initialization import point_cloud_diameter


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    return config, rows[0], rows[1:]


def test_evolve_matches_library(capsys):
    code, out, _ = run(["evolve", "--alpha", "2", "--tau", "3.7", "--cg", "1", "--ce", "0", "-o", "-"], capsys)
    assert code == 0
    config, header, rows = parse_csv(out)
    assert header == ["tau", "alpha", "phase", "x", "y", "z", "r"]
    assert len(rows) == 1
    ref = bloch_evolve(PureQubit(1, 0), CoherentField(2.0), EvolutionParams(3.7)).as_array()
    np.testing.assert_array_equal([float(v) for v in rows[0][3:6]], ref)
    assert config["alpha"] == 2.0


def test_evolve_with_phase_uses_oracle(capsys):
    code, out, _ = run(["evolve", "--alpha", "0.9", "--phase", "0.7", "--tau-k", "1", "-o", "-"], capsys)
    assert code == 0
    _, _, rows = parse_csv(out)
    assert float(rows[0][0]) == pytest.approx(math.pi / 2)
    assert float(rows[0][-1]) <= 1 + 1e-9


def test_aig_map_single_point_at_tau_zero(capsys):
    code, out, _ = run(["aig-map", "--tau-range", "0 0 1", "--alpha-range", "1 1 1", "-o", "-"], capsys)
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header == ["tau", "alpha", "i_avg", "status"]
    assert abs(float(rows[0][2])) < 1e-10
    assert rows[0][3] == "ok"


def test_fig2_map_columns(capsys):
    code, out, _ = run(["fig2-map", "--tau-range", "1 2 2", "--alpha-range", "0.5 1 2",
                        "--theta-nodes", "16", "--phi-nodes", "16", "--no-guard", "-o", "-"], capsys)
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header == ["tau", "alpha", "i_avg", "r_avg_sq", "diff", "status"]
    assert len(rows) == 4
    for row in rows:
        i, r2, diff = map(float, row[2:5])
        assert diff == pytest.approx(i - 0.2787 * r2, abs=1e-15)


def test_ball_image_five_clouds(capsys):
    code, out, _ = run(["ball-image", "--tau-k", "4", "--alpha", "0.2,0.4,0.6,0.8,1.0",
                        "--iters", "1", "--points", "200", "-o", "-"], capsys)
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header == ["alpha", "idx", "theta0", "phi0", "x", "y", "z", "iteration"]
    assert len(rows) == 5 * 200
    clouds = {}
    for row in rows:
        clouds.setdefault(float(row[0]), []).append([float(v) for v in row[4:7]])
    assert sorted(clouds) == [0.2, 0.4, 0.6, 0.8, 1.0]
    assert point_cloud_diameter(np.array(clouds[0.2])) < 0.1
    assert point_cloud_diameter(np.array(clouds[1.0])) > 0.1


def test_output_identical_across_worker_counts(tmp_path, capsys):
    outs = []
    for workers in ("1", "3"):
        path = tmp_path / f"w{workers}.csv"
        args = ["aig-map", "--tau-range", "0 4 3", "--alpha-range", "0 2 3",
                "--theta-nodes", "16", "--phi-nodes", "16", "--no-guard",
                "--workers", workers, "-o", str(path)]
        assert main(args) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    b1 = tmp_path / "b1.csv"
    b2 = tmp_path / "b2.csv"
    base = ["ball-image", "--tau-k", "3", "--alpha", "0.2,0.6", "--iters", "2", "--points", "30"]
    assert main(base + ["--workers", "1", "-o", str(b1)]) == 0
    assert main(base + ["--workers", "2", "-o", str(b2)]) == 0
    assert b1.read_bytes() == b2.read_bytes()


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nalpha = 2\ntau = 1.0\ncg = 0\nce = 1\n")
    assert read_config(cfg)["alpha"] == "2"
    code, out, _ = run(["evolve", "--config", str(cfg), "--tau", "3.7", "-o", "-"], capsys)
    assert code == 0
    config, _, rows = parse_csv(out)
    assert config["tau"] == 3.7 and config["alpha"] == 2.0
    ref = bloch_evolve(PureQubit(0, 1), CoherentField(2.0), EvolutionParams(3.7)).as_array()
    np.testing.assert_array_equal([float(v) for v in rows[0][3:6]], ref)


def test_env_overrides_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("JCQED_OUTPUT_DIR", str(tmp_path))
    monkeypatch.setenv("JCQED_WORKERS", "1")
    assert main(["evolve", "--alpha", "1", "--tau", "1"]) == 0
    assert (tmp_path / "evolve.csv").exists()


def test_json_mirrors_csv(capsys):
    argv = ["evolve", "--alpha", "1.5", "--tau", "2", "-o", "-"]
    _, csv_out, _ = run(argv, capsys)
    code, json_out, _ = run(argv + ["--format", "json"], capsys)
    assert code == 0
    doc = json.loads(json_out)
    _, header, rows = parse_csv(csv_out)
    assert doc["columns"] == header
    assert doc["rows"][0] == [float(v) for v in rows[0]]
    assert doc["config"]["format"] == "json"


@pytest.mark.parametrize("argv", [
    ["evolve", "--alpha", "x", "--tau", "1"],
    ["evolve", "--tau", "1"],
    ["evolve", "--alpha", "1"],
    ["evolve", "--alpha", "1", "--tau", "1", "--tau-k", "2"],
    ["aig-map", "--tau-range", "3 1 4"],
    ["nonsense"],
])
def test_bad_usage_exits_2(argv, capsys):
    code, _, err = run(argv + ["-o", "-"] if argv[0] != "nonsense" else argv, capsys)
    assert code == 2
    assert err


def test_missing_config_file_exits_2(capsys):
    code, _, err = run(["evolve", "--config", "/nonexistent/file", "-o", "-"], capsys)
    assert code == 2
    assert '"code"' in err


def test_point_failure_exits_3(capsys):
    code, out, err = run(["aig-map", "--tau-range", "40 40 1", "--alpha-range", "6 6 1",
                          "--theta-nodes", "4", "--phi-nodes", "4", "-o", "-"], capsys)
    assert code == 3
    _, _, rows = parse_csv(out)
    assert rows[0][-1] == "quadrature-non-convergence"
    assert rows[0][2] == "nan"
    line = [l for l in err.splitlines() if l.startswith("error: ")][-1]
    assert json.loads(line[len("error: "):])["code"] == "point-failure"


def test_library_error_exits_3(capsys):
    code, _, err = run(["init-search", "--target-theta", "0.5", "--tau-k", "1",
                        "--iters", "1", "--alpha-min", "0.05", "--alpha-max", "3",
                        "--points", "50", "-o", "-"], capsys)
    assert code == 3
    line = [l for l in err.splitlines() if l.startswith("error: ")][-1]
    assert json.loads(line[len("error: "):])["code"] == "bracket-failure"


def test_init_search(capsys):
    code, out, _ = run(["init-search", "--target-theta", "0", "--tau-k", "3", "--iters", "1",
                        "--points", "100", "-o", "-"], capsys)
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header[-1] == "residual"
    assert float(rows[0][-1]) < 0.05


def test_validate_reports_deviations(capsys):
    code, out, err = run(["validate", "--states", "5", "-o", "-"], capsys)
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header == ["alpha", "tau", "oracle_dev", "channel_dev", "completeness"]
    assert len(rows) == 16
    assert max(float(r[2]) for r in rows) < 1e-8
    assert "max |closed form - oracle|" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "jcqed", "evolve", "--alpha", "1", "--tau", "0", "-o", "-"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].startswith("tau,")
