"""End-to-end checks of the command-line driver.

Every invocation goes through cli.main() in-process with artifacts
written to pytest temporary directories, so exit codes, file lists,
and byte-level determinism are all observable without subprocesses.
"""

import filecmp
import json

import pytest

from nullwave import cli, gridio

SMALL_GRID = """\
[grid]
r_max = 8.0
n = 200
sponge_cells = 40
sponge_strength = 3.0
"""

NONLINEAR_INI = SMALL_GRID + """
[data]
eps = 1e-3

[run]
t_end = 4.0
stride = 5
tol = 1e-9
max_iter = 8

[fit]
model = power
window = 1 3
"""

# run-linear has its own grid overlay; only shrink what matters.
LINEAR_INI = """\
[grid]
r_max = 12.0
n = 300

[run]
t_end = 8.0

[fit]
window = 2 6
local_radius = 3.0
"""

SCAN_INI = SMALL_GRID + """
[run]
t_end = 4.0
stride = 5
tol = 1e-9
max_iter = 8

[scan]
eps = 5e-4 1e-3

[report]
time_stride = 5
deltas = 2.0 1.0 0.0
sup_window = 1 3
"""

GEOMETRY_INI = """\
[geometry]
samples = 2000
extent = 50.0
"""


def write_ini(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(argv, out):
    return cli.main(list(argv) + ["--out", str(out), "--quiet"])


def load(out, name):
    with open(str(out / name)) as fh:
        return json.load(fh)


def listing(out):
    return sorted(p.name for p in out.iterdir())


def test_verify_geometry_artifacts(tmp_path):
    ini = write_ini(tmp_path, GEOMETRY_INI)
    out = tmp_path / "out"
    assert run(["verify-geometry", "--config", ini], out) == 0
    assert listing(out) == ["geometry.json"]
    doc = load(out, "geometry.json")
    assert doc["schema_version"] == 1
    assert doc["subcommand"] == "verify-geometry"
    assert doc["seed"] == 0
    res = doc["results"]
    assert res["samples"] == 2000
    assert res["max_round_trip_rel"] < 1e-10
    assert res["max_conformal_dual_rel"] < 1e-10
    for case in res["intertwine"].values():
        r = case["residuals"]
        assert r[0] > r[1] > r[2] > 0
        for order in case["orders"]:
            assert 1.8 < order < 2.2


def test_run_linear_artifacts_and_overlay(tmp_path):
    ini = write_ini(tmp_path, LINEAR_INI)
    out = tmp_path / "out"
    assert run(["run-linear", "--config", ini], out) == 0
    assert listing(out) == ["linear.json", "linear_final.nwb",
                            "local_energy.csv"]
    doc = load(out, "linear.json")
    # subcommand overlay under the user's file: the experiment defaults
    # show through wherever the file is silent
    grid = doc["config"]["grid"]
    assert grid["angular_mode"] == 1
    assert grid["sponge_cells"] == 0
    assert grid["n"] == 300
    assert grid["r_max"] == 12.0
    assert doc["config"]["data"]["velocity"] == "zero"
    assert doc["config"]["nullform"]["kind"] == "linear"
    fit = doc["results"]["fit"]
    assert fit["model"] == "exponential"
    assert fit["rate"] > 0
    assert 2.0 <= fit["window"][0] < fit["window"][1] <= 6.0

    with open(str(out / "local_energy.csv")) as fh:
        assert fh.readline() == "t,local_energy\n"
        first = fh.readline().split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) > 0

    grid_back, t_final, fields = gridio.read_snapshot(
        str(out / "linear_final.nwb"))
    assert grid_back.n_nodes == 301
    assert t_final >= 8.0
    assert sorted(fields) == ["u", "v"]


def test_run_nonlinear_artifacts(tmp_path):
    ini = write_ini(tmp_path, NONLINEAR_INI)
    out = tmp_path / "out"
    assert run(["run-nonlinear", "--config", ini], out) == 0
    assert listing(out) == ["nonlinear.json", "nonlinear_final.nwb",
                            "residuals.csv", "sup_series.csv"]
    doc = load(out, "nonlinear.json")
    res = doc["results"]
    assert res["converged"] is True
    assert res["iterations"] >= 1
    assert len(res["residuals"]) == res["iterations"]
    assert res["boundary_max"] == 0.0
    assert res["sup_fit"]["model"] == "power"

    with open(str(out / "residuals.csv")) as fh:
        assert fh.readline() == "iteration,residual\n"
        assert fh.readline().startswith("1,")
    with open(str(out / "sup_series.csv")) as fh:
        assert fh.readline() == "t,sup\n"

    _, t_final, fields = gridio.read_snapshot(str(out / "nonlinear_final.nwb"))
    assert t_final >= 4.0
    assert sorted(fields) == ["u"]


def test_snapshot_toggle(tmp_path):
    ini = write_ini(tmp_path, NONLINEAR_INI
                    + "\n[output]\nsnapshots = false\n")
    out = tmp_path / "out"
    assert run(["run-nonlinear", "--config", ini], out) == 0
    assert listing(out) == ["nonlinear.json", "residuals.csv",
                            "sup_series.csv"]
    assert load(out, "nonlinear.json")["config"]["output"]["snapshots"] is False


def test_scan_smallness_artifacts(tmp_path):
    ini = write_ini(tmp_path, SCAN_INI)
    out = tmp_path / "out"
    assert run(["scan-smallness", "--config", ini], out) == 0
    assert listing(out) == ["scan.csv", "scan.json"]
    rows = load(out, "scan.json")["results"]["rows"]
    assert [r["eps"] for r in rows] == [5e-4, 1e-3]
    for row in rows:
        assert row["converged"] is True
        assert row["final_residual"] < 1e-8
        if row["iterations"] >= 2:
            assert row["final_ratio"] < 1e-3
        else:
            assert row["final_ratio"] is None
    with open(str(out / "scan.csv")) as fh:
        assert fh.readline() == \
            "eps,converged,iterations,final_residual,final_ratio\n"
        assert fh.readline().startswith("0.0005,true,")


def test_estimate_report_artifacts(tmp_path):
    ini = write_ini(tmp_path, SCAN_INI)
    out = tmp_path / "out"
    assert run(["estimate-report", "--config", ini], out) == 0
    assert listing(out) == ["delta_sweep.csv", "estimates.csv",
                            "estimates.json"]
    res = load(out, "estimates.json")["results"]
    spreads = res["ratio_spreads"]
    for name in ("ratio_local_linear", "ratio_null_cylinder",
                 "ratio_weighted_energy", "ratio_sup_decay"):
        assert spreads[name] > 0
    assert len(res["rows"]) == 2
    sweep = res["delta_sweep"]
    assert sweep["eps"] == 1e-3
    assert sweep["deltas"] == [2.0, 1.0, 0.0]
    vals = sweep["values"]
    assert vals[0] <= vals[1] <= vals[2]
    assert vals[0] > 0

    with open(str(out / "estimates.csv")) as fh:
        header = fh.readline().strip().split(",")
    assert header[0] == "eps"
    for name in ("ratio_local_linear", "ratio_sup_decay", "pecher_l8"):
        assert name in header
    with open(str(out / "delta_sweep.csv")) as fh:
        assert fh.readline() == "delta,tip_norm\n"


def test_check_compat_clean_data(tmp_path):
    # bump supported away from the boundary: every trace vanishes
    ini = write_ini(tmp_path, NONLINEAR_INI)
    out = tmp_path / "out"
    assert run(["check-compat", "--config", ini], out) == 0
    assert listing(out) == ["compat.json"]
    res = load(out, "compat.json")["results"]
    assert res["order"] == 2
    assert len(res["boundary_residuals"]) == 3
    for r in res["boundary_residuals"]:
        assert abs(r) <= 1e-12


def test_rerun_is_byte_identical(tmp_path):
    ini = write_ini(tmp_path, NONLINEAR_INI)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert run(["run-nonlinear", "--config", ini], out_a) == 0
    assert run(["run-nonlinear", "--config", ini], out_b) == 0
    names = listing(out_a)
    assert names == listing(out_b)
    for name in names:
        assert filecmp.cmp(str(out_a / name), str(out_b / name),
                           shallow=False), name


def test_threads_do_not_change_bytes(tmp_path):
    ini = write_ini(tmp_path, SCAN_INI)
    out_1 = tmp_path / "t1"
    out_3 = tmp_path / "t3"
    assert run(["scan-smallness", "--config", ini], out_1) == 0
    assert cli.main(["scan-smallness", "--config", ini, "--threads", "3",
                     "--out", str(out_3), "--quiet"]) == 0
    for name in listing(out_1):
        assert filecmp.cmp(str(out_1 / name), str(out_3 / name),
                           shallow=False), name


def test_seed_changes_geometry_samples(tmp_path):
    ini = write_ini(tmp_path, GEOMETRY_INI)
    out_0 = tmp_path / "s0"
    out_7 = tmp_path / "s7"
    assert run(["verify-geometry", "--config", ini], out_0) == 0
    assert cli.main(["verify-geometry", "--config", ini, "--seed", "7",
                     "--out", str(out_7), "--quiet"]) == 0
    doc_0 = load(out_0, "geometry.json")
    doc_7 = load(out_7, "geometry.json")
    assert doc_0["seed"] == 0
    assert doc_7["seed"] == 7
    assert doc_7["config"]["run"]["seed"] == 7
    assert (doc_0["results"]["max_round_trip_rel"]
            != doc_7["results"]["max_round_trip_rel"])


BAD_CONFIGS = [
    ("unknown_section", "[bogus]\nx = 1\n"),
    ("unknown_key", "[grid]\nnn = 3\n"),
    ("bad_value", "[grid]\nn = abc\n"),
    ("no_section_header", "not an ini [\n"),
    ("negative_t_end", "[run]\nt_end = -1.0\n"),
    ("zero_stride", "[run]\nstride = 0\n"),
    ("bad_obstacle", "[grid]\nmode = cartesian\nn = 16\nextent = 6.0\n"
                     "[obstacle]\nkind = cube\n"),
    ("bad_nullform", "[nullform]\nkind = cubic\n"),
    ("bad_data_family", "[data]\nfamily = plane\n"),
]


@pytest.mark.parametrize("label,text", BAD_CONFIGS,
                         ids=[c[0] for c in BAD_CONFIGS])
def test_config_errors_exit_2_and_write_nothing(tmp_path, label, text):
    ini = write_ini(tmp_path, text)
    out = tmp_path / "never"
    assert run(["check-compat", "--config", ini], out) == 2
    assert not out.exists()


def test_missing_config_file_exit_2(tmp_path):
    out = tmp_path / "never"
    rc = run(["check-compat", "--config", str(tmp_path / "absent.ini")], out)
    assert rc == 2
    assert not out.exists()


def test_bad_flags_exit_2(tmp_path):
    out = tmp_path / "never"
    assert cli.main(["verify-geometry", "--seed", "-2",
                     "--out", str(out), "--quiet"]) == 2
    assert cli.main(["scan-smallness", "--threads", "0",
                     "--out", str(out), "--quiet"]) == 2
    assert not out.exists()


def test_unknown_subcommand_rejected(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate", "--out", str(tmp_path / "never")])
    assert exc.value.code == 2
    capsys.readouterr()
    assert not (tmp_path / "never").exists()


def test_no_convergence_writes_diagnostic(tmp_path):
    ini = write_ini(tmp_path, NONLINEAR_INI
                    .replace("max_iter = 8", "max_iter = 1")
                    .replace("tol = 1e-9", "tol = 1e-14"))
    out = tmp_path / "out"
    assert run(["run-nonlinear", "--config", ini], out) == 3
    assert listing(out) == ["error.json"]
    err = load(out, "error.json")["error"]
    assert err["type"] == "NoConvergence"
    assert err["iterations"] == 1
    assert len(err["residuals"]) == 1
    assert err["residuals"][0] > 1e-14
    assert "convergence" in err["message"]


def test_smallness_guard_exit_3(tmp_path):
    ini = write_ini(tmp_path,
                    NONLINEAR_INI.replace("eps = 1e-3", "eps = 0.5"))
    out = tmp_path / "out"
    assert run(["run-nonlinear", "--config", ini], out) == 3
    err = load(out, "error.json")["error"]
    assert err["type"] == "ParamError"
    assert "smallness" in err["message"]


def test_sup_window_outside_run_exit_3(tmp_path):
    ini = write_ini(tmp_path,
                    SCAN_INI.replace("sup_window = 1 3",
                                     "sup_window = 50 60"))
    out = tmp_path / "out"
    assert run(["estimate-report", "--config", ini], out) == 3
    err = load(out, "error.json")["error"]
    assert err["type"] == "ParamError"


def test_explicit_dt_above_cfl_exit_3(tmp_path):
    ini = write_ini(tmp_path,
                    NONLINEAR_INI.replace("t_end = 4.0",
                                          "t_end = 4.0\ndt = 0.1"))
    out = tmp_path / "out"
    assert run(["run-nonlinear", "--config", ini], out) == 3
    err = load(out, "error.json")["error"]
    assert err["type"] == "CFLError"
    assert "CFL" in err["message"]


def test_quiet_flag_silences_progress(tmp_path, capsys):
    ini = write_ini(tmp_path, NONLINEAR_INI)
    assert cli.main(["check-compat", "--config", ini,
                     "--out", str(tmp_path / "loud")]) == 0
    assert "boundary residual" in capsys.readouterr().out
    assert cli.main(["check-compat", "--config", ini,
                     "--out", str(tmp_path / "still"), "--quiet"]) == 0
    assert capsys.readouterr().out == ""
