from __future__ import annotations

import json

import pytest

from positdiv.cli import main


def test_div_worked_example(capsys):
    assert main(["div", "--n", "10", "--x", "0011010111", "--d", "0001001100", "--variant", "srt-cs-of", "--radix", "2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "0110011111"
    assert "62" in out[2]


def test_div_zero_dividend(capsys):
    main(["div", "--n", "10", "--x", "0000000000", "--d", "0011010111"])
    assert capsys.readouterr().out.splitlines()[0] == "0000000000"


def test_div_scaled_matches_radix2(capsys):
    main(["div", "--n", "16", "--x", "0x4a3c", "--d", "0x2f01", "--radix", "4", "--scaled"])
    a = capsys.readouterr().out.splitlines()[0]
    main(["div", "--n", "16", "--x", "0x4a3c", "--d", "0x2f01", "--radix", "2"])
    assert capsys.readouterr().out.splitlines()[0] == a


def test_div_trace_is_jsonl(capsys):
    main(["div", "--n", "10", "--x", "0011010111", "--d", "0000100110", "--trace"])
    lines = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    assert lines[0]["record"] == "header" and lines[-1]["result"] == "0111010000"


def test_div_parse_error(capsys):
    assert main(["div", "--n", "10", "--x", "00110101x1", "--d", "1"]) == 2
    assert "position 8" in capsys.readouterr().err


def test_div_width_mismatch(capsys):
    assert main(["div", "--n", "10", "--x", "01101", "--d", "1"]) == 2
    assert "expected 10" in capsys.readouterr().err


def test_invalid_config_exits():
    with pytest.raises(SystemExit):
        main(["div", "--n", "10", "--x", "1", "--d", "1", "--variant", "nrd", "--radix", "4"])


def test_sweep_exhaustive(capsys):
    assert main(["sweep", "--n", "7", "--exhaustive", "--all-variants"]) == 0
    assert "pairs=16384  mismatches=0  violations=0" in capsys.readouterr().out


def test_sweep_random_json(capsys):
    assert main(["sweep", "--n", "32", "--random", "2000", "--variant", "srt-cs-of-fr", "--radix", "4", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["total"] == 2000 and rep["mismatches"] == 0 and len(rep["configs"]) == 1


def test_sweep_exhaustive_too_wide(capsys):
    assert main(["sweep", "--n", "13", "--exhaustive"]) == 2


def test_cycles(capsys):
    assert main(["cycles"]) == 0
    out = capsys.readouterr().out
    assert "n=16  radix-2: 14/17  radix-4: 8/11" in out
    assert "n=32  radix-2: 30/33  radix-4: 16/19" in out
    assert "n=64  radix-2: 62/65  radix-4: 32/35" in out


def test_table_dump_and_check(capsys):
    assert main(["table"]) == 0
    assert capsys.readouterr().out.startswith("# radix-4")
    assert main(["table", "--check"]) == 0
    assert "rebuild matches frozen table: True" in capsys.readouterr().out


def test_config_file_presets(tmp_path, capsys):
    cfg = tmp_path / "div.cfg"
    cfg.write_text("# preset\nvariant = srt-cs\nradix = 4\nn = 10\n")
    assert main(["--config", str(cfg), "div", "--x", "0011010111", "--d", "0001001100"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("0110011111") and "srt-cs/r4" in out


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit):
        main(["--config", str(cfg), "cycles"])
