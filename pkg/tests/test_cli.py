import csv
import json
import subprocess
import sys

import pytest

from sancode.cli import fmt, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(text.splitlines()))


@pytest.mark.parametrize("k, rho, expected", [("1", "1", "0.5"), ("0", "3", "1"), ("2", "1", "0.2")])
def test_erlang(capsys, k, rho, expected):
    code, out, _ = run(capsys, "erlang", "--K", k, "--rho", rho)
    assert code == 0 and out.strip() == expected


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 2 / 3, 1e-300, 123456789.123, 0.9391131213019749):
        assert float(fmt(x)) == x
        digits = fmt(x).split("e")[0].replace(".", "").replace("-", "").lstrip("0")
        assert len(digits) <= 17
    assert fmt(3) == "3" and fmt(1.0) == "1"


@pytest.mark.parametrize("argv", [
    ["erlang", "--K", "-1", "--rho", "1"],
    ["erlang", "--K", "x", "--rho", "1"],
    ["erlang", "--rho", "1"],
    ["sr-sweep", "--scheme", "ncs", "--s", "4", "--r", "3"],
    ["sr-sweep", "--scheme", "bogus"],
    ["figures", "--fig", "7", "--out", "x"],
])
def test_invalid_args_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        sys.exit(main(argv))
    assert info.value.code == 2


def test_unwritable_output_exit_3(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "erlang", "--K", "1", "--rho", "1", "--out", str(blocker / "x.txt"))
    assert code == 3 and "cannot write" in err


def test_sr_sweep_schema_and_monotone(capsys):
    code, out, _ = run(capsys, "sr-sweep", "--scheme", "ucs", "--s", "2", "--T", "150",
                       "--slots", "2", "--rho", "0.2")
    table = rows(out)
    assert code == 0
    assert table[0] == ["scheme", "s", "T_effective", "slots", "rho", "r", "W", "P_b"]
    assert [int(r[6]) for r in table[1:]] == list(range(1, 31))
    pb = [float(r[7]) for r in table[1:]]
    assert all(a >= b for a, b in zip(pb, pb[1:]))
    assert pb[0] > pb[-1]


def test_sr_sweep_rounds_T_for_ncs(capsys):
    _, out, _ = run(capsys, "sr-sweep", "--scheme", "ncs", "--s", "8", "--T", "150",
                    "--slots", "1", "--rho", "0.9", "--r", "8", "--w-max", "5")
    assert {r[2] for r in rows(out)[1:]} == {"152"}


def test_ncs_r1_equals_ucs(capsys):
    args = ["--s", "4", "--T", "150", "--slots", "2", "--rho", "0.9"]
    _, ucs, _ = run(capsys, "sr-sweep", "--scheme", "ucs", *args)
    _, ncs, _ = run(capsys, "sr-sweep", "--scheme", "ncs", "--r", "1", *args)
    assert [r[1:] for r in rows(ucs)] == [r[1:] for r in rows(ncs)]


def test_mr_exact(capsys):
    tiny = ["--m1", "1", "--m2", "1", "--slots", "1", "--lambda1", "1", "--lambda2", "1"]
    _, out, _ = run(capsys, "mr-exact", "--scheme", "urs", *tiny)
    table = rows(out)
    assert table[0] == ["scheme", "m1", "m2", "slots", "lambda1", "lambda2", "mu",
                        "P_s", "P_b1", "P_b2", "states", "K1", "M0"]
    assert float(table[1][7]) == pytest.approx(2 / 3, abs=1e-12)
    assert table[1][10:] == ["3", "1", "1"]
    _, out, _ = run(capsys, "mr-exact", "--scheme", "classical", *tiny)
    assert float(rows(out)[1][7]) == pytest.approx(1 / 3, abs=1e-15)


def test_mr_exact_crs_equals_urs_when_base_drives_dominate(capsys):
    args = ["--m1", "8", "--m2", "1", "--slots", "1", "--lambda1", "0.5", "--lambda2", "0.1"]
    _, u, _ = run(capsys, "mr-exact", "--scheme", "urs", *args)
    _, c, _ = run(capsys, "mr-exact", "--scheme", "crs", *args)
    assert abs(float(rows(u)[1][7]) - float(rows(c)[1][7])) < 1e-12


def test_mr_sim_columns_and_determinism(capsys):
    args = ["mr-sim", "--scheme", "urs", "--m1", "1", "--m2", "1", "--slots", "1",
            "--lambda1", "1", "--lambda2", "1", "--events", "20000", "--reps", "10", "--seed", "3"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    table = rows(a)
    assert table[0][-5:] == ["P_s_mean", "std_err", "reps", "events", "seed"]
    mean, se = float(table[1][7]), float(table[1][8])
    assert abs(mean - 2 / 3) <= 3 * se


def test_mr_sim_no_type2_traffic(capsys):
    _, out, _ = run(capsys, "mr-sim", "--scheme", "urs", "--m1", "2", "--m2", "1", "--slots", "2",
                    "--lambda1", "3", "--lambda2", "0", "--events", "50000", "--reps", "10")
    mean, se = float(rows(out)[1][7]), float(rows(out)[1][8])
    assert abs(mean - 0.20610687022900764) <= 3 * se  # B(4, 3)


def test_optimize(capsys):
    _, out, _ = run(capsys, "optimize", "--scheme", "urs", "--lambda-ratio", "1000000")
    table = rows(out)
    assert table[0] == ["scheme", "m", "m2_opt", "cost", "P_b1", "P_b2", "P_s"]
    assert table[1][2] == "1"


def test_rlnc_demo(capsys):
    code, out, _ = run(capsys, "rlnc-demo")
    assert code == 0
    assert "replication: 4/6" in out and "coded: 6/6" in out


def test_config_file_and_override(capsys, tmp_path):
    conf = tmp_path / "sweep.conf"
    conf.write_text("# figure 4b style\ns = 2\nrho = 0.9\nw-max = 3\n")
    _, out, _ = run(capsys, "sr-sweep", "--config", str(conf), "--s", "4")
    table = rows(out)
    assert {r[1] for r in table[1:]} == {"4"}
    assert {r[4] for r in table[1:]} == {"0.9"}
    assert len(table) == 4


def test_empty_config_gives_defaults(capsys, tmp_path):
    conf = tmp_path / "empty.conf"
    conf.write_text("")
    _, a, _ = run(capsys, "sr-sweep", "--config", str(conf))
    _, b, _ = run(capsys, "sr-sweep")
    assert a == b


def test_config_unknown_key_names_line(capsys, tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("sloots = 2\n")
    code, _, err = run(capsys, "sr-sweep", "--config", str(conf))
    assert code == 2 and ":1:" in err and "sloots" in err


def test_config_bad_value_names_line(capsys, tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("s = 2\n\nrho = fast\n")
    code, _, err = run(capsys, "sr-sweep", "--config", str(conf))
    assert code == 2 and ":3:" in err


def test_out_writes_manifest(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sr-sweep", "--w-max", "3", "--out", str(out))
    assert code == 0
    manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
    assert manifest["command"] == "sr-sweep"
    assert manifest["params"]["w_max"] == 3
    assert manifest["outputs"] == [str(out)]
    assert manifest["seed"] is None


def test_replay_reproduces_bytes(capsys, tmp_path):
    out = tmp_path / "sim.csv"
    run(capsys, "mr-sim", "--scheme", "crs", "--events", "5000", "--reps", "4", "--seed", "99",
        "--out", str(out))
    again = tmp_path / "again.csv"
    code = main(["replay", str(out) + ".manifest.json", "--out", str(again)])
    assert code == 0
    assert again.read_bytes() == out.read_bytes()


@pytest.mark.parametrize("fig, files", [
    ("4a", ["ucs.csv", "ncs_r2.csv"]),
    ("4b", ["ucs.csv", "ncs_r2.csv", "ncs_r4.csv"]),
    ("5", ["ucs.csv", "ncs_r2.csv", "ncs_r4.csv", "ncs_r8.csv"]),
    ("9", ["classical.csv", "urs.csv", "crs.csv", "classical_fixed.csv"]),
])
def test_figures(capsys, tmp_path, fig, files):
    code, _, _ = run(capsys, "figures", "--fig", fig, "--out-dir", str(tmp_path))
    assert code == 0
    for name in files + ["manifest.json"]:
        assert (tmp_path / name).exists()
    if fig in ("4b", "5"):
        assert {r[2] for r in rows((tmp_path / "ucs.csv").read_text())[1:]} == {"152"}
    if fig == "4a":
        assert {r[2] for r in rows((tmp_path / "ucs.csv").read_text())[1:]} == {"150"}


def test_figure8_small(capsys, tmp_path):
    code, _, _ = run(capsys, "figures", "--fig", "8", "--out", str(tmp_path),
                     "--events", "2000", "--reps", "3")
    assert code == 0
    table = rows((tmp_path / "urs.csv").read_text())
    assert [float(r[table[0].index("load")]) for r in table[1:]] == [1, 2, 3, 4, 5, 6, 7, 8]
    assert (tmp_path / "crs.csv").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sancode", "erlang", "--K", "2", "--rho", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0.2"
    proc = subprocess.run([sys.executable, "-m", "sancode", "erlang", "--K", "oops", "--rho", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
