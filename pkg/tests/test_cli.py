"""End-to-end runs of the command line driver on a tiny ladder.

Exit codes: 0 ok, 2 config, 3 missing inputs, 4 capacity, 5 numerical.
"""

import json

import pytest

from qwork import io
from qwork.cli import main


def write_config(path, out_dir, **overrides):
    values = {
        "length": 2,
        "seed": 11,
        "rates": "100, 150",
        "k_dos": "512",
        "k_ldos": "512",
        "beta_override": "1.0",
        "out_dir": str(out_dir),
    }
    values.update({k: str(v) for k, v in overrides.items()})
    path.write_text("\n".join([
        "[system]",
        f"length = {values['length']}",
        f"seed = {values['seed']}",
        *([f"memory_budget = {values['memory_budget']}"]
          if "memory_budget" in values else []),
        "[field]",
        f"rates = {values['rates']}",
        "[spectral]",
        f"k_dos = {values['k_dos']}",
        f"k_ldos = {values['k_ldos']}",
        "[analysis]",
        f"beta_override = {values['beta_override']}",
        "[output]",
        f"out_dir = {values['out_dir']}",
    ]) + "\n")
    return path


def test_full_pipeline(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "run.ini", out)
    assert main(["--config", str(cfg), "dos"]) == 0
    assert (out / "dos.csv").exists()
    assert (out / "beta.json").exists()
    assert main(["--config", str(cfg), "run"]) == 0
    assert (out / "psi_ini.qwrk").exists()
    assert (out / "p_ini.csv").exists()
    for rate in ("100", "150"):
        rdir = out / f"rate_{rate}"
        assert (rdir / "trace.csv").exists()
        assert (rdir / "p_fin.qwrk".replace("p_fin", "psi_fin")).exists()
        assert (rdir / "p_fin.csv").exists()
    assert main(["--config", str(cfg), "analyze"]) == 0
    reports = io.read_work_reports(out / "work_report.json")
    assert len(reports) == 2
    # reports carry the realized rate after the ramp time snaps to the
    # step grid, a hair off the nominal value
    ratios = sorted(r["gamma_over_gamma0"] for r in reports)
    assert ratios == pytest.approx([100.0, 150.0], rel=1e-3)
    for r in reports:
        assert r["beta"] == 1.0
        assert 0.0 < r["exp_avg"] < 10.0
        assert r["big_delta_e"] > 0.0
    # the worst rate carries the shifted fixture with its offset
    worst = max(reports, key=lambda r: abs(1.0 - r["exp_avg"]))
    nominal = min((100, 150),
                  key=lambda g: abs(g - worst["gamma_over_gamma0"]))
    fixture = out / f"rate_{nominal:g}" / "p_fin_shifted.csv"
    assert fixture.exists()
    shifted = io.read_density_csv(fixture)
    assert shifted.kind == "ldos"


def test_single_rate_run(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "run.ini", out)
    assert main(["--config", str(cfg), "run", "--rate", "150"]) == 0
    assert (out / "rate_150" / "p_fin.csv").exists()
    assert not (out / "rate_100").exists()


def test_unknown_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[system]\nlength = 2\nturbo = yes\n")
    assert main(["--config", str(cfg), "dos"]) == 2


def test_analyze_without_inputs_exits_3(tmp_path):
    cfg = write_config(tmp_path / "run.ini", tmp_path / "empty")
    assert main(["--config", str(cfg), "analyze"]) == 3


def test_capacity_exits_4(tmp_path):
    cfg = write_config(tmp_path / "run.ini", tmp_path / "out",
                       memory_budget=1024)
    assert main(["--config", str(cfg), "prepare"]) == 4


def test_numerical_failure_exits_5(tmp_path):
    # beta_override = 0 passes config validation but the energy-offset
    # extraction needs a nonzero beta
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "run.ini", out, beta_override="0.0")
    assert main(["--config", str(cfg), "run"]) == 0
    assert main(["--config", str(cfg), "analyze"]) == 5


def test_reruns_byte_identical_below_headers(tmp_path):
    cfg_a = write_config(tmp_path / "a.ini", tmp_path / "out_a")
    cfg_b = write_config(tmp_path / "b.ini", tmp_path / "out_b")
    for cfg in (cfg_a, cfg_b):
        assert main(["--config", str(cfg), "dos"]) == 0
        assert main(["--config", str(cfg), "prepare"]) == 0
    assert (io.data_body(tmp_path / "out_a" / "dos.csv")
            == io.data_body(tmp_path / "out_b" / "dos.csv"))
    assert (io.data_body(tmp_path / "out_a" / "p_ini.csv")
            == io.data_body(tmp_path / "out_b" / "p_ini.csv"))
    assert ((tmp_path / "out_a" / "psi_ini.qwrk").read_bytes()
            == (tmp_path / "out_b" / "psi_ini.qwrk").read_bytes())


def test_seed_override_changes_data(tmp_path):
    cfg = write_config(tmp_path / "run.ini", tmp_path / "out_a")
    assert main(["--config", str(cfg), "prepare"]) == 0
    assert main(["--config", str(cfg), "--out", str(tmp_path / "out_b"),
                 "--seed", "99", "prepare"]) == 0
    assert (io.data_body(tmp_path / "out_a" / "p_ini.csv")
            != io.data_body(tmp_path / "out_b" / "p_ini.csv"))


def test_scan_needs_three_sizes(tmp_path):
    cfg = write_config(tmp_path / "run.ini", tmp_path / "out")
    assert main(["--config", str(cfg), "scan", "--sizes", "2,3",
                 "--rate", "150"]) == 2


def test_scan_small_sizes(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "run.ini", out)
    assert main(["--config", str(cfg), "scan", "--sizes", "2,3,4",
                 "--rate", "150"]) == 0
    payload = json.loads((out / "scaling.json").read_text())
    scaling = payload["scaling"]
    assert scaling["lengths"] == [2, 3, 4]
    assert len(scaling["delta"]) == 3
    assert len(scaling["baseline_width"]) == 3
    for L in (2, 3, 4):
        assert (out / "scan" / f"L{L}" / "work_report.json").exists()
