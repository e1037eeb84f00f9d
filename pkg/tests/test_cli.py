"""Problem files and command-line workflows."""
import json
import math

import pytest

from drqft.cli import main
from drqft.demo import PROBLEMS, problem_dict, write_all
from drqft.problems import ProblemError, load_problem


@pytest.fixture(scope="module")
def problem_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("problems")
    write_all(d)
    return d


def test_schema_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "timing": {"Ts": -1, "N": 3}}))
    with pytest.raises(ProblemError):
        load_problem(bad)


def test_schema_rejects_inconsistent_family():
    obj = problem_dict("ex3")
    obj["plant"] = {
        "kind": "explicit",
        "members": [
            {"num": [1.0], "den": [1.0, 1.0]},
            {"num": [1.0], "den": [1.0, -1.0]},
        ],
        "nominal_index": 0,
    }
    with pytest.raises(ProblemError):
        load_problem(obj)


def test_load_each_bundled_problem(problem_dir):
    for name in PROBLEMS:
        p = load_problem(problem_dir / f"{name}.json")
        assert p.name == name


def test_analyze_stable_problem_exit_zero(problem_dir, capsys):
    rc = main(["analyze", str(problem_dir / "ex3.json")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "STABLE" in out


def test_analyze_robust_margin_failure(problem_dir, capsys):
    rc = main(["analyze", str(problem_dir / "ex7.json")])
    out = capsys.readouterr().out
    assert rc == 1
    assert "robust margin" in out and "FAIL" in out
    # worst offender at the upper parameter end, near the Nyquist rate
    line = next(l for l in out.splitlines() if "robust margin" in l)
    assert "2.5" in line


def test_analyze_rwip_pid_tracking_failure(problem_dir, capsys):
    rc = main(["analyze", str(problem_dir / "rwip_pid.json")])
    out = capsys.readouterr().out
    assert rc == 1
    assert "nominal STABLE" in out
    # continuous tracking boundaries at the three lowest frequencies fail
    fails = [l for l in out.splitlines() if "ctrack" in l and "FAIL" in l]
    assert len(fails) == 3


def test_analyze_rwip_qft_passes(problem_dir, capsys):
    rc = main(["analyze", str(problem_dir / "rwip_qft.json")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "nominal STABLE" in out


def test_analyze_missing_file_exit_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", str(tmp_path / "nope.json")])
    assert exc.value.code == 2


def test_bounds_outputs_deterministic(problem_dir, tmp_path):
    out1 = tmp_path / "b1"
    out2 = tmp_path / "b2"
    assert main(["bounds", str(problem_dir / "ex9.json"), "--out", str(out1)]) == 0
    assert main(["bounds", str(problem_dir / "ex9.json"), "--out", str(out2)]) == 0
    files1 = sorted(p.name for p in out1.glob("*.json"))
    files2 = sorted(p.name for p in out2.glob("*.json"))
    assert files1 == files2
    for name in files1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_bounds_ex9_counts(problem_dir, tmp_path):
    out = tmp_path / "bounds9"
    main(["bounds", str(problem_dir / "ex9.json"), "--out", str(out)])
    ct = sorted(out.glob("boundary_ctrack-*.json"))
    assert len(ct) == 13
    nyq = math.pi / 0.4
    below = beyond = 0
    for p in ct:
        obj = json.loads(p.read_text())
        if obj["omega_source"] <= nyq * (1 + 1e-9):
            below += 1
        else:
            beyond += 1
            assert obj["omega_design"] <= nyq * (1 + 1e-9)  # fold metadata
    assert below == 7 and beyond == 6
    dt = sorted(out.glob("boundary_dtrack-*.json"))
    assert len(dt) == 7
    # CSV mirrors exist
    assert len(list(out.glob("boundary_*.csv"))) == len(list(out.glob("boundary_*.json")))


def test_bounds_empty_design_set(problem_dir, tmp_path):
    out = tmp_path / "bounds3"
    rc = main(["bounds", str(problem_dir / "ex3.json"), "--out", str(out)])
    assert rc == 0
    assert list(out.glob("boundary_*.json")) == []


def test_simulate_step_ripple(problem_dir, tmp_path):
    out = tmp_path / "sim"
    rc = main([
        "simulate", str(problem_dir / "ex3.json"),
        "--ref", "step", "--t-end", "8", "--out", str(out),
    ])
    assert rc == 0
    trace = json.loads((out / "trace.json").read_text())
    assert trace["N"] == 3
    csv_lines = (out / "trace.csv").read_text().splitlines()
    assert csv_lines[0] == "t,r,u,y"
    assert len(csv_lines) > 100


def test_simulate_zero_length_exit_two(problem_dir, tmp_path):
    rc = main([
        "simulate", str(problem_dir / "ex3.json"),
        "--ref", "step", "--t-end", "0", "--out", str(tmp_path / "x"),
    ])
    assert rc == 2


def test_simulate_bad_reference_exit_two(problem_dir, tmp_path):
    rc = main([
        "simulate", str(problem_dir / "ex3.json"),
        "--ref", "triangle", "--t-end", "5", "--out", str(tmp_path / "x"),
    ])
    assert rc == 2


def test_ex11_analyze_passes_all_boundaries(problem_dir, capsys):
    rc = main(["analyze", str(problem_dir / "ex11.json")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "FAIL" not in out


def test_ex9_analyze_fails_ripple_boundary(problem_dir, capsys):
    rc = main(["analyze", str(problem_dir / "ex9.json")])
    out = capsys.readouterr().out
    assert rc == 1
    failing = [l for l in out.splitlines() if "FAIL" in l and "ctrack" in l]
    assert len(failing) == 1
    assert "ctrack-10" in failing[0]


def test_report_json_written(problem_dir, tmp_path, capsys):
    report = tmp_path / "report.json"
    main(["analyze", str(problem_dir / "ex3.json"), "--json", str(report)])
    obj = json.loads(report.read_text())
    assert obj["problem"] == "ex3"
    assert obj["verdict"]["stable"] is True
