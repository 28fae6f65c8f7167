"""Command-line behavior: outputs, exit codes, cache wiring."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from rspin.cli import run
from rspin.store import CacheStore


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_dr1_both_methods_prints_value_twice(capsys):
    code, out, _ = invoke(capsys, "dr1", "--r", "4", "--k", "2,-2", "--a", "2,2", "--method", "both")
    assert code == 0
    assert out.splitlines() == ["1/32", "1/32"]


def test_dr1_relation3_prints_zero(capsys):
    code, out, _ = invoke(capsys, "dr1", "--r", "4", "--k", "1,-1", "--a", "2,2")
    assert code == 0
    assert out.splitlines() == ["0", "0"]


def test_b_subcommand_golden(capsys):
    code, out, _ = invoke(capsys, "b", "--r", "4", "--a", "0")
    assert code == 0
    assert out.strip() == "1/8"


def test_g0_subcommand(capsys):
    code, out, _ = invoke(capsys, "g0", "--r", "5", "--a", "1,1,3,3")
    assert code == 0
    assert out.strip() == "1/5"


def test_loopsum_subcommand(capsys):
    code, out, _ = invoke(capsys, "loopsum", "--r", "5", "--m", "2", "--x", "3,3")
    assert code == 0
    assert out.strip() == "1/5"


def test_usage_error_exits_64(capsys):
    code, _, err = invoke(capsys, "g0", "--r", "5")
    assert code == 64
    assert "required" in err
    code, _, _ = invoke(capsys, "nonsense")
    assert code == 64
    code, _, err = invoke(capsys, "g0", "--r", "5", "--a", "1,x,3")
    assert code == 64


def test_grading_error_exits_65(capsys):
    code, _, err = invoke(capsys, "g0", "--r", "4", "--a", "9,1,1")
    assert code == 65
    assert "twist" in err
    code, _, err = invoke(capsys, "dr1", "--r", "4", "--k", "2,-1", "--a", "2,2")
    assert code == 65
    code, _, err = invoke(capsys, "dr1", "--r", "4", "--k", "2,-2", "--a", "2,2,2")
    assert code == 65


def test_method_disagreement_exits_2(capsys, tmp_path):
    # poison the relational memo so the two routes visibly part ways
    path = tmp_path / "cache.json"
    store = CacheStore()
    store.put("dr1:r=4:k=2,-2:a=2,2", Fraction(1, 31))
    store.save(str(path))
    code, out, err = invoke(
        capsys,
        "dr1", "--r", "4", "--k", "2,-2", "--a", "2,2",
        "--method", "both", "--cache", str(path),
    )
    assert code == 2
    assert out.splitlines() == ["1/32", "1/31"]
    assert "disagreement" in err


def test_dr1_json_payload(capsys):
    code, out, _ = invoke(
        capsys,
        "dr1", "--r", "6", "--k", "2,1,-3", "--a", "4,4,4", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["key"] == "dr1:r=6:k=3,-1,-2:a=4,4,4"
    assert payload["agree"] is True
    assert [res["method"] for res in payload["results"]] == ["closed", "relations"]
    for res in payload["results"]:
        assert res["value"] == "1/72"
        assert res["status"] == "ok"


def test_g0_json_payload(capsys):
    code, out, _ = invoke(capsys, "g0", "--r", "4", "--a", "3,1,1,3", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["key"] == "g0:r=4:a=1,1,3,3"
    assert payload["results"][0]["status"] == "dimension-mismatch-zero"
    assert payload["results"][0]["value"] == "0/1"


def test_verify_json_and_exit_codes(capsys):
    code, out, _ = invoke(
        capsys,
        "verify", "--suite", "loop", "--r-max", "4", "--n-max", "4", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert isinstance(payload, list) and payload[0]["suite"] == "loop"
    assert payload[0]["failures"] == []

    code, out, _ = invoke(
        capsys,
        "verify", "--suite", "loop", "--r-max", "4", "--n-max", "4", "--extended",
    )
    assert code == 1
    assert "FAIL" in out


def test_verify_all_text(capsys):
    code, out, _ = invoke(
        capsys,
        "verify", "--suite", "all", "--r-max", "4", "--n-max", "4", "--k-sum-max", "4",
    )
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 4
    assert all("pass" in line for line in lines)


def test_table_g0_csv(capsys):
    code, out, _ = invoke(capsys, "table", "--kind", "g0", "--r", "4", "--n-max", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "r,a,value"
    assert '4,"1,1,2,2",1/4' in lines


def test_table_dr1_json(capsys):
    code, out, _ = invoke(
        capsys,
        "table", "--kind", "dr1", "--r", "4", "--n-max", "2",
        "--k-sum-max", "4", "--format", "json",
    )
    assert code == 0
    rows = json.loads(out)
    by_key = {row["key"]: row for row in rows}
    assert by_key["dr1:r=4:k=2,-2:a=2,2"]["value"] == "1/32"
    keys = [row["key"] for row in rows]
    assert keys == sorted(keys)


def test_dr1_cache_file_written_by_relational_route(capsys, tmp_path):
    path = tmp_path / "memo.json"
    code, _, _ = invoke(
        capsys,
        "dr1", "--r", "8", "--k", "4,-4", "--a", "2,6",
        "--method", "relations", "--cache", str(path),
    )
    assert code == 0
    store = CacheStore.load(str(path))
    assert store.get("dr1:r=8:k=4,-4:a=2,6") == Fraction(25, 64)


def test_dr1_closed_method_never_touches_cache(capsys, tmp_path):
    path = tmp_path / "memo.json"
    code, _, _ = invoke(
        capsys,
        "dr1", "--r", "4", "--k", "2,-2", "--a", "2,2",
        "--method", "closed", "--cache", str(path),
    )
    assert code == 0
    assert not path.exists()


def test_cache_env_var_used_for_bare_flag(capsys, tmp_path, monkeypatch):
    path = tmp_path / "env-cache.json"
    monkeypatch.setenv("RSPIN_CACHE", str(path))
    code, _, _ = invoke(capsys, "g0", "--r", "4", "--a", "2,2,2,2,2", "--cache")
    assert code == 0
    assert path.exists()
    store = CacheStore.load(str(path))
    assert store.get("g0:r=4:a=2,2,2,2,2") == Fraction(1, 8)


def test_help_exits_zero(capsys):
    code, out, _ = invoke(capsys, "--help")
    assert code == 0
    assert "usage" in out
