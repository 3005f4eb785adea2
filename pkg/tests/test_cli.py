import csv

import pytest

from stochleray.cli import main

SMOKE = """
N = 16
T = 0.02
noise_cutoff = 5
samples = 4
pilot_samples = 16
alphas = 0.2, 0.1, 0.05
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "smoke.cfg"
    p.write_text(SMOKE)
    return p


def test_verify_operators_exit_zero(capsys):
    assert main(["verify-operators"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "16/16 checks passed" in out


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--frobnicate"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--seed", "-1"])
    assert info.value.code == 2


def test_invalid_config_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("N = 16\nnu = -1\nwibble = 3\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "unknown config key" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_convergence_study_output_and_determinism(tmp_path, cfg_file):
    outs = []
    for name, workers in (("a", "1"), ("b", "2")):
        out = tmp_path / name
        assert main(["convergence-study", "--config", str(cfg_file), "--seed", "5",
                     "--out", str(out), "--workers", workers, "--dump-series"]) == 0
        outs.append(out)
    rows = list(csv.reader(open(outs[0] / "results.csv")))
    assert rows[0] == ["alpha", "mean_loc_err", "sem", "mean_eps", "tau_full_frac", "blowups"]
    assert [r[0] for r in rows[1:]] == ["0.2", "0.1", "0.05", "fit"]
    for f in ("results.csv", "plot_data.dat", "fit.json"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    assert len(list((outs[0] / "series").glob("series_s*_a*.csv"))) == 4 * 3


def test_simulate_writes_series(tmp_path, cfg_file, capsys):
    assert main(["simulate", "--config", str(cfg_file), "--out", str(tmp_path), "--sample", "2",
                 "--snapshot"]) == 0
    files = sorted(tmp_path.glob("series_s2_a*.csv"))
    assert len(files) == 3
    assert files[0].read_text().splitlines()[0] == "t,eps_sup,eps_int,m1,y,IV,I4"
    assert (tmp_path / "snapshot_s2.bin").stat().st_size > 0


def test_tail_study_writes_csv(tmp_path, cfg_file):
    assert main(["tail-study", "--config", str(cfg_file), "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "tail.csv")))
    assert rows[0][:3] == ["n", "alpha", "gamma"] and len(rows) == 4


def test_blow_up_exit_three(tmp_path, capsys):
    cfg = tmp_path / "wild.cfg"
    cfg.write_text("N = 16\nnoise_cutoff = 5\nnu = 1e-4\ndt = 0.5\nT = 200\nu0_norm = 1000\nalphas = 0.1\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 3
    assert "blow-up" in capsys.readouterr().err


def test_out_dir_from_environment(tmp_path, cfg_file, monkeypatch):
    monkeypatch.setenv("STOCHLERAY_OUT", str(tmp_path / "env"))
    assert main(["simulate", "--config", str(cfg_file)]) == 0
    assert list((tmp_path / "env").glob("series_s0_*.csv"))
