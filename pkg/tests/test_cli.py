import json
import math

import pytest

from stochpension.cli import main

Q, VOL = 0.0027, 0.1


def run(tmp_path, *args):
    return main(["--out", str(tmp_path), *map(str, args)])


@pytest.fixture(scope="module")
def synthetic_panel(tmp_path_factory):
    d = tmp_path_factory.mktemp("panel")
    assert main(["--out", str(d), "--seed", "5", "synth", "--paths", "2000", "--horizon", "504",
                 "--drift", repr(math.log1p(Q)), "--vol", repr(VOL), "--file", "panel.csv"]) == 0
    return d / "panel.csv"


def test_estimate_recovers_synthetic_generator(tmp_path, synthetic_panel, capsys):
    assert run(tmp_path, "estimate", "--panel", synthetic_panel) == 0
    doc = json.loads((tmp_path / "constants.json").read_text())
    c = doc["results"]
    assert abs(c["psi"] / (12 * Q) - 1) < 0.15
    assert abs(c["phi"] / (math.sqrt(12) * VOL) - 1) < 0.15
    assert doc["diagnostics"]["salary_source"] == "config"
    assert (tmp_path / "stock_surface.csv").read_text().startswith("tau,x_center,count,a,b2\n")
    assert {"config", "config_hash", "seed", "version", "diagnostics"} <= set(doc)


def test_estimate_flat_panel_gives_zero_constants(tmp_path):
    rows = ["id,t,value"] + [f"f{i},{t},2.5" for i in range(20) for t in range(30)]
    (tmp_path / "flat.csv").write_text("\n".join(rows) + "\n")
    assert run(tmp_path, "estimate", "--panel", tmp_path / "flat.csv", "--salary-panel", tmp_path / "flat.csv",
               "--salary-period", "month") == 0
    c = json.loads((tmp_path / "constants.json").read_text())["results"]
    assert (c["psi"], c["phi"], c["xi"], c["eta"]) == (0.0, 0.0, 0.0, 0.0)


def test_estimate_missing_cpi_period_fails(tmp_path, capsys):
    (tmp_path / "p.csv").write_text("id,t,value\nA,0,1\nA,1,1.1\nA,2,1.2\nA,3,1.3\n")
    (tmp_path / "cpi.csv").write_text("t,index\n0,100\n1,101\n")
    assert run(tmp_path, "estimate", "--panel", tmp_path / "p.csv", "--cpi", tmp_path / "cpi.csv") != 0
    assert "period 2" in capsys.readouterr().err


def test_schema_error_names_the_row(tmp_path, capsys):
    (tmp_path / "p.csv").write_text("id,t,value\nA,0,1\nA,1,oops\n")
    assert run(tmp_path, "estimate", "--panel", tmp_path / "p.csv") == 2
    assert "row 3" in capsys.readouterr().err


def test_empty_ratio_list_gives_empty_table(tmp_path):
    assert run(tmp_path, "tables", "pension", "--years", "25", "--ratios", "") == 0
    assert (tmp_path / "table_pension.csv").read_text().strip().count("\n") == 0
    assert json.loads((tmp_path / "table_pension.json").read_text())["results"] == []


def test_tables_need_parameters_or_paper_defaults(tmp_path, capsys):
    assert run(tmp_path, "tables", "survival") == 2
    assert "error" in capsys.readouterr().err


def test_drain_crosscheck_passes(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[mc]\nn_paths = 2000\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "crosscheck", "drain", "--ratio", "7.5",
                 "--horizon", "15", "--coarse-grid"]) == 0
    doc = json.loads((tmp_path / "crosscheck.json").read_text())
    (mfpt,) = [ch for ch in doc["results"]["checks"] if ch["quantity"] == "mfpt"]
    assert mfpt["fpe"] == pytest.approx(7.5, abs=0.01)
    # the simulated starts share the solver's initial spread
    assert abs(mfpt["mc"] - 7.5) < 3 * mfpt["mc_se"]


def test_survival_crosscheck_at_ten_years(tmp_path):
    assert run(tmp_path, "--paper-defaults", "--seed", "1", "crosscheck", "survival", "--ratio", "10",
               "--years", "10", "--horizon", "15") == 0
    (check,) = json.loads((tmp_path / "crosscheck.json").read_text())["results"]["checks"]
    assert abs(check["fpe"] - check["mc"]) < max(0.015, 3 * check["mc_se"])


def test_coarsened_grid_fails_the_crosscheck(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[mc]\nn_paths = 20000\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "crosscheck", "survival", "--ratio", "10",
                 "--years", "10,11,12", "--horizon", "15", "--coarse-grid", "--coarsen", "8"]) == 1
    assert "FAILED" in capsys.readouterr().out
    assert json.loads((tmp_path / "crosscheck.json").read_text())["results"]["pass"] is False


def _outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.suffix in (".csv", ".json")}


def test_outputs_byte_identical_across_runs_and_workers(tmp_path):
    outs = []
    for i, workers in enumerate((1, 1, 4)):
        d = tmp_path / f"run{i}"
        cfg = tmp_path / f"c{i}.ini"
        cfg.write_text(f"[mc]\nn_paths = 3000\nblock_size = 256\nworkers = {workers}\ndt = 0.05\n")
        assert main(["--config", str(cfg), "--seed", "11", "--out", str(d), "simulate", "--kind", "consumption",
                     "--ratio", "10", "--horizon", "12"]) == 0
        outs.append(_outputs(d))
    assert outs[0] == outs[1] == outs[2]
    d = tmp_path / "other_seed"
    assert main(["--config", str(tmp_path / "c0.ini"), "--seed", "12", "--out", str(d), "simulate", "--kind",
                 "consumption", "--ratio", "10", "--horizon", "12"]) == 0
    assert _outputs(d) != outs[0]


def test_consumption_simulation_defaults_to_long_horizon(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[mc]\nn_paths = 200\ndt = 0.1\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "simulate", "--kind", "consumption"]) == 0
    doc = json.loads((tmp_path / "simulate.json").read_text())
    assert doc["mc"]["horizon"] == 120.0
    assert doc["results"]["mfpt"]["details"]["censored_fraction"] < 0.05


def test_config_file_parsing(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[constants]\npsi = 0.0\nphi = 0.0\n[grid1d]\ndx = 0.01\nn = 1200\ndk = 0.01\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "solve", "--kind", "consumption", "--ratio", "7.5",
                 "--horizon", "10"]) == 0
    doc = json.loads((tmp_path / "solve.json").read_text())
    assert doc["config"]["constants"] == {"psi": 0.0, "phi": 0.0}
    assert doc["config"]["grid1d"]["n"] == 1200
    cfg.write_text("[constants]\nomega = 1\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "solve"]) == 2
    assert "omega" in capsys.readouterr().err
    cfg.write_text("[grid9]\nx = 1\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "solve"]) == 2


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for key in ("[constants]", "psi", "[grid2d]", "n_v", "[grid1d]", "[mc]", "n_paths", "[paths]", "life_table"):
        assert key in text
