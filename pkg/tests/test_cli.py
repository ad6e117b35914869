import json
import math

import numpy as np
import pytest

from resetpid.cli import main
from resetpid.lti import FrequencyCurve


def test_df_linear_lag(tmp_path):
    assert main(["--out", str(tmp_path), "df", "--corner-hz", "100", "--gamma", "1", "--points", "50"]) == 0
    c = FrequencyCurve.from_csv((tmp_path / "df_gfore_gamma_1.csv").read_text())
    p = 2 * math.pi * 100
    assert np.allclose(c.values, p / (1j * c.omega + p), rtol=1e-12)


def test_df_plateau(tmp_path):
    main(["--out", str(tmp_path), "df", "--gamma", "0", "--fmax-hz", "1e5"])
    c = FrequencyCurve.from_csv((tmp_path / "df_gfore_gamma_0.csv").read_text())
    assert c.phase_deg[-1] == pytest.approx(-38.1, abs=0.2)


def test_df_bad_gamma(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "df", "--gamma", "3"]) != 0
    assert "gamma" in capsys.readouterr().err


def test_beta_sweep(tmp_path):
    main(["--out", str(tmp_path), "df", "--beta-sweep"])
    rows = (tmp_path / "beta.csv").read_text().splitlines()
    assert rows[0] == "gamma,beta" and len(rows) == 22
    assert rows[-1] == "1.000000,1.0"


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("RESETPID_OUT", str(tmp_path / "env"))
    main(["df", "--gamma", "0.5", "--points", "5"])
    assert (tmp_path / "env" / "df_gfore_gamma_0.5.csv").exists()


def test_design_a(tmp_path):
    assert main(["--out", str(tmp_path), "design", "--type", "A", "--wc-hz", "150", "--pm-deg", "45"]) == 0
    rep = json.loads((tmp_path / "design_A.json").read_text())
    assert rep["phase_margin_deg"] == pytest.approx(45, abs=1)
    assert rep["crossover_hz"] == pytest.approx(150, rel=1e-6)
    assert rep["stability"] == "Infeasible"
    assert main(["--out", str(tmp_path), "design", "--type", "A", "--strict"]) == 1


def test_design_b_from_pid_file(tmp_path):
    main(["--out", str(tmp_path), "design", "--type", "pid"])
    assert (tmp_path / "controller_pid.json").exists()
    main(["--out", str(tmp_path), "design", "--type", "B", "--match", str(tmp_path / "controller_pid.json")])
    rep = json.loads((tmp_path / "design_B.json").read_text())
    assert 190 <= rep["crossover_hz"] <= 215


def test_reproduce_fig4_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--out", str(a), "--seed", "1", "reproduce", "fig4"]) == 0
    assert main(["--out", str(b), "--seed", "1", "reproduce", "fig4"]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert (a / "fig4" / "beta.csv").read_bytes() == (b / "fig4" / "beta.csv").read_bytes()
    summary = json.loads((a / "summary.json").read_text())
    assert {"name", "expected", "actual", "tolerance", "pass"} <= set(summary[0])


def test_reproduce_config_and_exit_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "fig6", "match_factor": 10.0}))
    rc = main(["--out", str(tmp_path / "o"), "reproduce", "fig6", "--config", str(cfg)])
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert rc == (0 if all(c["pass"] for c in summary) else 1)
    crossover = [c for c in summary if "crossover" in c["name"]][0]
    assert crossover["actual"] > 215 / 150  # decade matching pushes B past the window


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    with pytest.raises(ValueError):
        main(["--out", str(tmp_path), "reproduce", "fig4", "--config", str(cfg)])
