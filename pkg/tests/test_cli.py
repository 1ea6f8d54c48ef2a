import subprocess
import sys
from pathlib import Path

from oqamwifi import cli, harness

GOLDEN = Path(__file__).parent / "golden"


def test_tables_command_writes_golden_csv(tmp_path, capsys):
    assert cli.main(["tables", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "table2.csv").read_text() == (GOLDEN / "table2.csv").read_text()
    assert (tmp_path / "table3.csv").read_text() == (GOLDEN / "table3.csv").read_text()
    out = capsys.readouterr().out
    assert "42.04" in out and "8.53" in out
    assert (tmp_path / "tables.txt").read_text() == out


def test_ber_sweep_with_config(tmp_path, capsys):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text("scheme = cp\nframes = 3\nsnr = 25\npayload_bytes = 40\n")
    rc = cli.main(["ber-sweep", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "9"])
    assert rc == 0
    recs = harness.read_records(tmp_path / "o" / "ber_sweep.csv")
    assert len(recs) == 1 and recs[0].n_frames == 3 and recs[0].snr_db == 25.0
    assert "ber_sweep.json" in capsys.readouterr().out


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("frames = 50\nseed = 1\n")
    args = cli.build_parser().parse_args(
        ["cfo-rmse", "--config", str(cfg), "--frames", "5", "--snr", "0:5:10", "--genie-sync"])
    sc = cli.scenario_from_args(args)
    assert sc.n_frames == 5 and sc.master_seed == 1 and sc.genie_sync
    assert sc.snr_db == (0.0, 5.0, 10.0) and sc.measure == "sync"


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frames = -1\n")
    assert cli.main(["ber-sweep", "--config", str(cfg)]) == 2
    assert cli.main(["ber-sweep", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert "error:" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "oqamwifi", "tables"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "oqam" in res.stdout.lower()
