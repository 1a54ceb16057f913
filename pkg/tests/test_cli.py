import math

import pytest

from berrygate.cli import main


def run_cli(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def report_value(stdout, key):
    for line in stdout.splitlines():
        if line.startswith(key):
            return float(line.split("=", 1)[1].strip().split()[0])
    raise KeyError(key)


def cone_args(theta, omega0=5.0, omega1=1.0):
    return ["--omega0", str(omega0), "--omega1", str(omega1),
            "--omega", str(omega0 - omega1 / math.tan(theta))]


def test_simulate_cone_report_and_csv(tmp_path, capsys):
    out_csv = tmp_path / "traj.csv"
    code, out, _ = run_cli(
        capsys, "simulate", *cone_args(math.pi / 3), "--output", str(out_csv)
    )
    assert code == 0
    gamma = report_value(out, "geometric_symmetrized")
    assert abs(gamma - (-math.pi / 2)) < 1e-3
    assert "omega0 = 5.0" in out  # config echoed
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "t,sx,sy,sz,re0,im0,re1,im1"
    assert len(lines) > 100
    first = lines[1].split(",")
    assert len(first) == 8
    assert float(first[0]) == 0.0
    # starts in the aligned eigenstate near the north pole
    assert float(first[3]) > 0.99


def test_simulate_zero_amplitude_reports_zero_gamma(tmp_path, capsys):
    out_csv = tmp_path / "idle.csv"
    code, out, _ = run_cli(
        capsys, "simulate", "--omega0", "5.0", "--omega1", "0.0", "--omega", "4.0",
        "--sweep-time", "50.0", "--dt", "0.01", "--output", str(out_csv),
    )
    assert code == 0
    assert abs(report_value(out, "geometric_phase_rad")) < 1e-6


def test_simulate_rate_independent_report(tmp_path, capsys):
    args = cone_args(math.pi / 3) + ["--output", str(tmp_path / "a.csv")]
    _, out1, _ = run_cli(capsys, "simulate", *args)
    _, out2, _ = run_cli(capsys, "simulate", *args, "--sweep-factor", "2.0")
    g1 = report_value(out1, "geometric_symmetrized")
    g2 = report_value(out2, "geometric_symmetrized")
    d1 = report_value(out1, "dynamic_phase_rad")
    d2 = report_value(out2, "dynamic_phase_rad")
    assert abs(g1 - g2) < 1e-3
    assert abs(d1 - d2) > 1.0


def test_sweep_minimal_grid(tmp_path, capsys):
    out_csv = tmp_path / "s.csv"
    code, out, _ = run_cli(
        capsys, "sweep", "--detuning-count", "2", "--omega1-count", "2",
        "--output", str(out_csv),
    )
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert len(lines) == 1 + 4
    assert lines[0] == "detuning_over_piJ,omega1_over_piJ,delta_gamma_rad"
    assert (tmp_path / "s.csv.peaks.csv").exists()
    # deterministic: identical config gives byte-identical output
    out_csv2 = tmp_path / "s2.csv"
    run_cli(capsys, "sweep", "--detuning-count", "2", "--omega1-count", "2",
            "--output", str(out_csv2))
    assert out_csv.read_bytes() == out_csv2.read_bytes()


def test_sweep_peak_slopes_reported(tmp_path, capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--detuning-count", "5", "--omega1-count", "30",
        "--output", str(tmp_path / "s.csv"),
    )
    assert code == 0
    peaks = (tmp_path / "s.csv.peaks.csv").read_text().splitlines()[1:]
    for row in peaks:
        fields = row.split(",")
        assert abs(float(fields[3])) < 1e-6 * float(fields[2])


def test_verify_list(capsys):
    code, out, _ = run_cli(capsys, "verify", "--list")
    assert code == 0
    names = out.splitlines()
    assert "cone-geometric-phase" in names
    assert "adiabaticity" in names
    assert len(names) >= 15


def test_usage_errors_exit_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    code, _, err = run_cli(
        capsys, "simulate", "--sweep-time", "-3", "--output", str(tmp_path / "x.csv")
    )
    assert code == 2
    assert "sweep-time" in err
    code, _, err = run_cli(
        capsys, "sweep", "--detuning-count", "1", "--output", str(tmp_path / "y.csv")
    )
    assert code == 2


def test_unwritable_output_exits_2(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "simulate", *cone_args(math.pi / 3),
        "--output", str(tmp_path / "missing" / "t.csv"),
    )
    assert code == 2
    assert "error" in err.lower()


def test_config_file_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("omega1 = 0.8\n# comment line\nomega = 4.3\n")
    code, out, _ = run_cli(
        capsys, "--config", str(cfg), "simulate", "--omega", "4.1",
        "--output", str(tmp_path / "t.csv"),
    )
    assert code == 0
    assert "omega1 = 0.8" in out  # from the file
    assert "omega = 4.1" in out  # flag overrides the file
    code, _, err = run_cli(capsys, "--config", str(tmp_path / "nope.cfg"), "verify", "--list")
    assert code == 2
