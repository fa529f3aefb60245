import csv
import json

import pytest

from racetrack.cli import (EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, PROFILE_HEADER,
                           SPECTRUM_HEADER, SWEEP_HEADER, fmt, main)
from racetrack.config import (OUT_DIR_ENV, ConfigError, RunConfig, build_config,
                              load_config)


@pytest.fixture(autouse=True)
def _no_env_out_dir(monkeypatch):
    monkeypatch.delenv(OUT_DIR_ENV, raising=False)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# ------------------------------------------------------------------ config

def test_config_defaults():
    cfg = RunConfig()
    assert (cfg.F, cfg.mu, cfg.I, cfg.dt, cfg.epsilon) == (1.0, 0.1, 256, 0.01, 1e-10)
    assert cfg.seed_list() == list(range(10))


def test_key_value_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# sigma run\nsigma = 8.5\ntau=0.5  # inline comment\nseeds = 0-2,7\n"
                 "format = csv\n")
    cfg = load_config(p)
    assert cfg.sigma == 8.5 and cfg.tau == 0.5
    assert cfg.seed_list() == [0, 1, 2, 7]
    assert cfg.format == ["csv"]


def test_json_file(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(json.dumps({"sigma": 5, "Phi": 3.0, "seeds": [4, 5], "I": 64}))
    cfg = load_config(p)
    assert cfg.Phi == 3.0 and cfg.I == 64 and cfg.seed_list() == [4, 5]


@pytest.mark.parametrize("text, key", [
    ("sigma = 0.5", "sigma"), ("bogus = 1", "bogus"), ("I = 7", "I"), ("I = 2.5", "I"),
    ("seeds = ", "seeds"), ("mu = abc", "mu"), ("amplitude = 1.0", "amplitude"),
    ("kappa = 1", "kappa"), ("format = png", "format"), ("dt = 0", "dt"),
    ("sigma = 5\nsigma = 6", "sigma"), ("epsilon = nan", "epsilon"),
])
def test_config_errors_name_the_key(tmp_path, text, key):
    p = tmp_path / "bad.cfg"
    p.write_text(text + "\n")
    with pytest.raises(ConfigError, match=key):
        load_config(p)


def test_json_config_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(p)
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="object"):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.cfg")


def test_precedence(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("sigma = 6\nout_dir = from_file\n")
    env = {OUT_DIR_ENV: "from_env"}
    assert load_config(p, env={}).out_dir == "from_file"
    assert load_config(p, env=env).out_dir == "from_env"
    cfg = load_config(p, {"out_dir": "from_flag", "sigma": "7"}, env=env)
    assert cfg.out_dir == "from_flag" and cfg.sigma == 7.0


@pytest.mark.parametrize("changes", [
    {}, {"sigma": 8.5, "tau": 0.95, "Phi": 3.0, "seeds": [3, 1, 2], "format": ["json"]},
    {"mu": 0.123456789012345678, "epsilon": 1e-8, "amplitude": 0.001, "kappa": 1.5},
])
def test_round_trip(tmp_path, changes):
    cfg = build_config(changes)
    (tmp_path / "a.cfg").write_text(cfg.to_text())
    (tmp_path / "a.json").write_text(cfg.to_json())
    assert load_config(tmp_path / "a.cfg", env={}) == cfg
    assert load_config(tmp_path / "a.json", env={}) == cfg
    assert load_config(tmp_path / "a.cfg", env={}).params() == cfg.params()


def test_fmt_full_precision():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x
    assert fmt(True) == "true" and fmt(None) == "" and fmt(3) == "3"


# ------------------------------------------------------------------ commands

def test_spectrum_command(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["spectrum", "-o", str(out), "--n-max", "40"]) == EXIT_OK
    rows = read_csv(out / "spectrum.csv")
    assert ",".join(rows[0]) == SPECTRUM_HEADER
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 41))
    meta = json.loads((out / "spectrum.json").read_text())
    assert meta["schema"] == 1 and meta["no_black_hole"] is True
    assert meta["fastest_mode"] == 2 and meta["n_tilde"] == 0
    # full precision in every numeric column
    assert len(rows[2][2].replace("0.", "").lstrip("0")) >= 15


def test_spectrum_zero_mu(tmp_path):
    out = tmp_path / "o"
    assert main(["spectrum", "-o", str(out), "--mu", "0"]) == EXIT_OK
    rows = read_csv(out / "spectrum.csv")[1:]
    assert all(float(r[2]) == 0 and r[4] == "marginal" for r in rows)


@pytest.mark.parametrize("sigma, tau, Phi", [(5, 0.9, 3.0), (8.5, 0.5, 1.3), (2.0, 1.5, 0.5)])
def test_spectrum_unstable_above_n_tilde(tmp_path, sigma, tau, Phi):
    out = tmp_path / "o"
    assert main(["spectrum", "-o", str(out), "--sigma", str(sigma), "--tau", str(tau),
                 "--Phi", str(Phi), "--n-max", "200"]) == EXIT_OK
    nt = json.loads((out / "spectrum.json").read_text())["n_tilde"]
    rows = read_csv(out / "spectrum.csv")[1:]
    assert all(r[4] == "unstable" for r in rows if int(r[0]) > nt)


def test_simulate_outputs_and_determinism(tmp_path):
    args = ["simulate", "--I", "32", "--tau", "0.9", "--seed", "3", "--snapshot-stride", "50000"]
    assert main(args + ["-o", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["-o", str(tmp_path / "b")]) == EXIT_OK
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "profile.csv").read_bytes() == (b / "profile.csv").read_bytes()
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()
    rows = read_csv(a / "profile.csv")
    assert ",".join(rows[0]) == PROFILE_HEADER and len(rows) == 33
    summary = json.loads((a / "summary.json").read_text())
    assert summary["schema"] == 1 and summary["converged"] is True
    rep = summary["spike_report"]
    assert summary["spike_count"] == rep["spike_count"] == len(rep["spikes"]) >= 1
    masses = sum(s["mass"] for s in rep["spikes"]) + rep["background_mass"]
    assert masses == pytest.approx(1.0, abs=1e-10)


def test_simulate_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env"))
    assert main(["simulate", "--I", "16", "--epsilon", "1e-6", "--format", "json"]) == EXIT_OK
    assert (tmp_path / "env" / "summary.json").exists()
    assert not (tmp_path / "env" / "profile.csv").exists()


def test_simulate_invalid_input(tmp_path, capsys):
    assert main(["simulate", "--sigma", "0.5", "-o", str(tmp_path)]) == EXIT_INVALID
    assert "sigma" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_simulate_non_convergence(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--I", "32", "--max-steps", "10", "-o", str(out)]) == \
        EXIT_NOT_CONVERGED
    assert json.loads((out / "summary.json").read_text())["converged"] is False


def test_simulate_blowup_removes_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--I", "32", "--dt", "1e6", "--max-steps", "100",
                 "-o", str(out)]) == 3
    assert not out.exists() or list(out.iterdir()) == []


def test_sweep_command(tmp_path):
    out = tmp_path / "o"
    assert main(["sweep", "--I", "32", "--axis", "tau", "--values", "0.9,0.3",
                 "--seeds", "0-1", "-o", str(out)]) == EXIT_OK
    rows = read_csv(out / "sweep.csv")
    assert ",".join(rows[0]) == SWEEP_HEADER
    assert [(float(r[0]), int(r[2])) for r in rows[1:]] == [(0.3, 0), (0.3, 1), (0.9, 0), (0.9, 1)]
    for value in (0.3, 0.9):
        mine = [r for r in rows[1:] if float(r[0]) == value]
        assert int(mine[0][1]) == max(int(r[3]) for r in mine)
    assert (out / "profile_tau_0.3.csv").exists() and (out / "profile_tau_0.9.csv").exists()
    meta = json.loads((out / "sweep.json").read_text())
    assert meta["schema"] == 1 and meta["axis"] == "tau"


def test_sweep_flags_nbh_violation(tmp_path):
    out = tmp_path / "o"
    assert main(["sweep", "--I", "16", "--epsilon", "1e-6", "--axis", "Phi", "--values",
                 "1.2", "--seeds", "0", "-o", str(out)]) == EXIT_OK
    assert read_csv(out / "sweep.csv")[1][7] == "false"


@pytest.mark.parametrize("extra", [["--seeds", ""], ["--values", "abc"], ["--values", "0.5,-1"]])
def test_sweep_invalid(tmp_path, extra):
    args = ["sweep", "--axis", "tau", "--values", "0.5", "-o", str(tmp_path)]
    assert main(args + extra) == EXIT_INVALID


def test_sweep_all_points_failed(tmp_path):
    assert main(["sweep", "--I", "16", "--max-steps", "3", "--axis", "tau", "--values", "0.5",
                 "--seeds", "0", "-o", str(tmp_path / "o")]) == EXIT_NOT_CONVERGED


def test_validate_passes(capsys):
    assert main(["validate"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("pass") == 8


def test_validate_zero_mu():
    assert main(["validate", "--mu", "0"]) == EXIT_OK


def test_validate_coarse_dt_fails(capsys):
    assert main(["validate", "--dt", "1.0"]) != EXIT_OK
    assert "FAILED" in capsys.readouterr().out
