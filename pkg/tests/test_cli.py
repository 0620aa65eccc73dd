import csv
import json
import subprocess
import sys

import pytest

from tamperlog.archive import KeyFile, LogArchive
from tamperlog.cli import main
from tamperlog.encoder import default_schema
from tamperlog.prf import Tag

SEED_HEX = "000102030405060708090a0b0c0d0e0f"


@pytest.fixture
def work(tmp_path):
    key = tmp_path / "k.key"
    ev = tmp_path / "ev.jsonl"
    arr = tmp_path / "arr.txt"
    assert main(["keygen", "--out", str(key), "--cores", "3", "--cadence", "1", "--seed-hex", SEED_HEX]) == 0
    assert main(["generate", "--out", str(ev), "--duration", "0.4", "--rate", "600", "--cores", "3",
                 "--dup-rate", "0.3", "--seed", "5", "--arrivals", str(arr)]) == 0
    return tmp_path, key, ev, arr


def sign(work, *extra):
    tmp, key, ev, _ = work
    out = tmp / "a.xlog"
    rep = tmp / "sign.json"
    assert main(["sign", str(ev), "--key", str(key), "--out", str(out), "--report", str(rep), *extra]) == 0
    return out, json.loads(rep.read_text())


def test_generate_is_reproducible(work, tmp_path):
    _, _, ev, _ = work
    again = tmp_path / "again.jsonl"
    main(["generate", "--out", str(again), "--duration", "0.4", "--rate", "600", "--cores", "3",
          "--dup-rate", "0.3", "--seed", "5"])
    assert again.read_bytes() == ev.read_bytes()


def test_sign_and_verify(work, capsys):
    out, rep = sign(work)
    assert rep["loss"]["p_loss"] == 0 and rep["stored"] == rep["signed"]
    assert rep["secret_bytes"] == 3 * 48
    capsys.readouterr()
    assert main(["verify", str(out), "--key", str(work[1])]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "intact" and len(report["lines"]) == 3


@pytest.mark.parametrize("mode", ["fixed", "dynamic"])
def test_reduce_keeps_archives_verifiable(work, mode):
    out, rep = sign(work, "--reduce", mode)
    assert rep["reduction"]["dropped"] > 0
    assert main(["verify", str(out), "--key", str(work[1])]) == 0


def test_attacks_are_detected(work, capsys):
    tmp, key, _, _ = work
    out, _ = sign(work)
    bad = tmp / "bad.xlog"
    assert main(["attack", str(out), "--mode", "modify", "--line", "1", "--index", "3", "--bit", "5",
                 "--out", str(bad)]) == 0
    capsys.readouterr()
    assert main(["verify", str(bad), "--key", str(key)]) == 2
    line = json.loads(capsys.readouterr().out)["lines"][1]
    assert line["status"] == "tampered" and line["prefix"] == [1, 2] and line["mismatch_index"] == 3
    assert main(["attack", str(out), "--mode", "truncate", "--line", "0", "--keep", "2",
                 "--present-checkpoint", "--out", str(bad)]) == 0
    assert main(["verify", str(bad), "--key", str(key)]) == 2


def test_replay_attack(work, tmp_path):
    tmp, key, ev, _ = work
    old, _ = sign(work)
    other = tmp / "other.key"
    main(["keygen", "--out", str(other), "--cores", "3", "--cadence", "1"])
    new = tmp / "new.xlog"
    main(["sign", str(ev), "--key", str(other), "--out", str(new)])
    spliced = tmp / "spliced.xlog"
    assert main(["attack", str(new), "--mode", "replay", "--captured", str(old), "--out", str(spliced)]) == 0
    assert main(["verify", str(spliced), "--key", str(other)]) == 2


def test_empty_archive_rejected(tmp_path):
    empty = tmp_path / "e.xlog"
    LogArchive(64, 1, 1, 12, default_schema().digest(), [], [[]], [Tag.zero(64)]).save(empty)
    assert main(["attack", str(empty), "--mode", "truncate", "--out", str(tmp_path / "x")]) == 65


def test_usage_errors(work, tmp_path):
    out, _ = sign(work)
    assert main(["verify", str(out), "--key", str(tmp_path / "missing.key")]) == 64
    assert main(["bench", "--threads", "0"]) == 64
    with pytest.raises(SystemExit) as ei:
        main(["verify"])
    assert ei.value.code == 64
    with pytest.raises(SystemExit) as ei:
        main(["frobnicate"])
    assert ei.value.code == 64
    assert main(["keygen", "--out", str(tmp_path / "x.key"), "--seed-hex", "00"]) == 64


def test_format_errors(work, tmp_path):
    out, _ = sign(work)
    cut = tmp_path / "cut.xlog"
    cut.write_bytes(out.read_bytes()[:-3])
    assert main(["verify", str(cut), "--key", str(work[1])]) == 65
    k = tmp_path / "k4.key"
    KeyFile(bytes(16), 4).save(k)
    assert main(["verify", str(out), "--key", str(k)]) == 65
    junk = tmp_path / "junk.jsonl"
    junk.write_text("not json\n")
    assert main(["sign", str(junk), "--key", str(work[1]), "--out", str(tmp_path / "o")]) == 65


def test_schema_mismatch(work, tmp_path):
    out, _ = sign(work)
    schema = tmp_path / "s.txt"
    schema.write_text("tamperlog-schema 1\n0 read 4,8\n")
    assert main(["verify", str(out), "--key", str(work[1]), "--schema", str(schema)]) == 65
    default_schema().save(schema)
    assert main(["verify", str(out), "--key", str(work[1]), "--schema", str(schema)]) == 0


def test_simulate_and_sweep(work, capsys, tmp_path):
    _, _, _, arr = work
    capsys.readouterr()
    assert main(["simulate", str(arr), "--cores", "3", "--sp", "32768", "--sr", "67108864"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["p_loss"] == 0 and rep["feasible"]
    table = tmp_path / "sweep.csv"
    assert main(["sweep", str(arr), "--cores", "3", "--out", str(table), "--sp-list", "64", "4096",
                 "--sr-list", "1024", "--tp-list", "50", "--tr-list", "200"]) == 0
    rows = list(csv.DictReader(table.open()))
    assert len(rows) == 2 and float(rows[0]["p_loss"]) >= float(rows[1]["p_loss"])
    assert list(rows[0]) == ["s_p", "s_r", "t_p", "t_r", "p_loss", "flushes"]


def test_analyze(tmp_path, capsys):
    f = tmp_path / "f.csv"
    f.write_text("x,y\n" + "".join(f"{2 + i % 3},{4 + i % 5}\n" for i in range(30)))
    assert main(["analyze", "--fieller", str(f)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["lo"] <= rep["rho"] <= rep["hi"] and rep["n"] == 30
    g = tmp_path / "g.csv"
    g.write_text("x_s,x_b,y\n" + "".join(
        f"{s},{b},{10 + 2 * s + b + 0.5 * s * b}\n" for s in (-1, 1) for b in (-1, 1) for _ in range(3)))
    assert main(["analyze", "--factorial", str(g)]) == 0
    assert abs(json.loads(capsys.readouterr().out)["f_s"] - 4 / 5.25) < 1e-12
    assert main(["analyze", "--fieller", str(g)]) == 65


def test_bench_command(tmp_path, capsys):
    fac = tmp_path / "fac.csv"
    assert main(["bench", "--threads", "1", "--duration", "0.1", "--rate", "500",
                 "--replicates", "1", "--factorial-csv", str(fac)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert [r["mode"] for r in rep["rows"]] == ["single-line", "per-core"]
    assert len(list(csv.DictReader(fac.open()))) == 4


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "tamperlog", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify" in r.stdout
