import csv
import math
import subprocess
import sys
from pathlib import Path

import pytest

from logconf import verify
from logconf.cli import HEADERS, main, steady_header

CONFIGS = Path(__file__).parent.parent / "configs"


def read_rows(path):
    raw = Path(path).read_bytes()
    assert raw.endswith(b"\r\n")
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_verify_is_deterministic(tmp_path):
    cfg = write(tmp_path, "seed = 42\n[tolerances]\nverify_cases = 6\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["verify", "--config", cfg, "--out", str(a), "--quiet"]) == 0
    assert main(["verify", "--config", cfg, "--out", str(b), "--quiet"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = read_rows(a)
    assert rows[0] == HEADERS["verify"]
    assert all(r[-1] == "pass" for r in rows[1:])


def test_seed_flag_changes_report(tmp_path):
    cfg = write(tmp_path, "[tolerances]\nverify_cases = 4\n")
    outs = []
    for seed in ("1", "2"):
        out = tmp_path / f"s{seed}.csv"
        assert main(["verify", "--config", cfg, "--out", str(out), "--seed", seed, "--quiet"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] != outs[1]


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setitem(verify.SUITES, "broken", lambda seed, n: verify.SuiteResult("broken", n, 1.0, 0.5))
    out = tmp_path / "v.csv"
    assert main(["verify", "--out", str(out), "--quiet"]) == 1
    assert read_rows(out)[-1][0] == "broken" and read_rows(out)[-1][-1] == "fail"


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["steady", "--config", write(tmp_path, "[model]\nalpha = 1.5\n")]) == 2
    assert "alpha" in capsys.readouterr().err
    assert main(["steady", "--config", str(tmp_path / "missing.toml")]) == 2
    assert main(["steady", "--config", write(tmp_path, "x = [\n")]) == 2
    assert main(["verify", "--seed", "-1"]) == 2


def test_internal_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["steady", "--out", str(blocker / "out.csv")]) == 3
    assert "internal error" in capsys.readouterr().err


def test_steady_csv_schema_and_round_trip(tmp_path):
    out = tmp_path / "steady.csv"
    cfg = write(tmp_path, "[flow]\nrate = 1.0\n")
    assert main(["steady", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    rows = read_rows(out)
    assert rows[0] == steady_header(3)
    assert rows[0][:3] == ["wi", "psi_11", "psi_22"] and rows[0][-1] == "status"
    row = dict(zip(rows[0], rows[1]))
    assert row["status"] == "converged"
    assert float(row["sigma_11"]) == pytest.approx(3.0, abs=1e-10)
    assert float(row["sigma_12"]) == pytest.approx(1.0, abs=1e-10)
    # 17 significant digits survive the text round trip exactly
    assert repr(float(row["psi_11"])) == repr(float(format(float(row["psi_11"]), ".17g")))


def test_dim2_header(tmp_path):
    out = tmp_path / "s2.csv"
    assert main(["steady", "--config", write(tmp_path, "dim = 2\n"), "--out", str(out), "--quiet"]) == 0
    assert read_rows(out)[0] == ["wi", "psi_11", "psi_22", "psi_12", "sigma_11", "sigma_22", "sigma_12",
                                 "newton_iters", "final_residual", "order_estimate", "status"]


def test_giesekus_sweep_all_converged(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["sweep", "--config", str(CONFIGS / "sweep_giesekus.toml"), "--out", str(out), "--quiet"]) == 0
    rows = read_rows(out)[1:]
    assert float(rows[-1][0]) == 15.0
    assert all(r[-1] == "converged" for r in rows)


def test_extension_sweep_flags_past_limit(tmp_path):
    out = tmp_path / "e.csv"
    cfg = str(CONFIGS / "sweep_extension_oldroyd_b.toml")
    assert main(["sweep", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    rows = read_rows(out)
    header = rows[0]
    for r in rows[1:]:
        wi = float(r[0])
        if wi < 0.5:
            assert r[-1] == "converged"
        else:
            assert r[-1] != "converged"
            assert math.isnan(float(r[header.index("psi_11")]))


def test_transient_csv(tmp_path):
    out = tmp_path / "t.csv"
    cfg = write(tmp_path, "[transient]\nt_end = 1.0\ndt = 0.01\noutput_every = 10\n")
    assert main(["transient", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    rows = read_rows(out)
    assert rows[0] == HEADERS["transient"] and len(rows) == 12
    assert max(float(r[1]) for r in rows[1:]) <= 1e-8
    assert all(float(r[2]) > 0 for r in rows[1:])


def test_wake_blow_up_rows(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["wake", "--config", str(CONFIGS / "wake_plateau.toml"), "--out", str(out), "--quiet"]) == 0
    rows = read_rows(out)
    assert rows[0] == HEADERS["wake"]
    assert rows[-1][-1] == "blow_up" and float(rows[-1][1]) > 50
    assert all(r[-1] == "ok" for r in rows[1:-1])


def test_wake_subcritical_prints_residual(tmp_path, capsys):
    out = tmp_path / "w.csv"
    assert main(["wake", "--config", str(CONFIGS / "wake_subcritical.toml"), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "extremal identity residual" in printed and str(out) in printed


def test_quiet_suppresses_stdout(tmp_path, capsys):
    assert main(["steady", "--out", str(tmp_path / "q.csv"), "--quiet"]) == 0
    assert capsys.readouterr().out == ""


def test_console_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "logconf.cli", "steady", "--out", str(out), "--quiet"])
    assert proc.returncode == 0 and out.exists()
