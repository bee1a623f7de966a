import json
from pathlib import Path

import pytest

from finhall.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
A2 = str(CONFIGS / "a2-q2.json")


def run(tmp_path, *args, out="out"):
    return main(list(args) + ["--out", str(tmp_path / out), "--cache-dir", str(tmp_path / "cache")])


def test_catalog_cache_hit_and_rebuild(tmp_path, capsys):
    assert run(tmp_path, "catalog", "--config", A2) == 0
    assert "cache built" in capsys.readouterr().out
    assert run(tmp_path, "catalog", "--config", A2) == 0
    assert "cache hit" in capsys.readouterr().out
    (cache,) = (tmp_path / "cache").glob("catalog-*.json")
    cache.write_text(cache.read_text().replace('"aut_order":', '"aut_order": 1, "x":', 1))
    assert run(tmp_path, "catalog", "--config", A2) == 0
    assert "cache rebuilt" in capsys.readouterr().out
    listing = json.loads((tmp_path / "out" / "catalog.json").read_text())
    assert {c["id"] for c in listing["classes"]} >= {"1.0:0", "0.1:0", "1.1:0", "1.1:1"}


def test_check_passes_and_is_deterministic(tmp_path):
    assert run(tmp_path, "check", "--config", A2, "--suite", "all", out="r1") == 0
    assert run(tmp_path, "check", "--config", A2, "--suite", "all", out="r2") == 0
    for name in ("check-all.json", "manifest-check-all.json"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
    assert (tmp_path / "r1" / "timings-check-all.json").exists()


def test_check_failure_exit_code(tmp_path, capsys):
    code = run(tmp_path, "check", "--config", str(CONFIGS / "a2-q2-simple-framing.json"), "--suite", "hall")
    assert code == 1
    assert "FAIL  hall       framed-torsion-factorization" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    assert run(tmp_path, "check", "--config", str(CONFIGS / "a2-q2-negative-theta.json")) == 2
    assert "config error" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "quiver": {"vertices": [1]}}')
    assert run(tmp_path, "catalog", "--config", str(bad)) == 2


def test_negative_theta_with_override_fails_pqss(tmp_path):
    cfg = str(CONFIGS / "a2-q2-negative-theta.json")
    assert run(tmp_path, "check", "--config", cfg, "--suite", "pqss", "--skip-weight-validation") == 1
    doc = json.loads((tmp_path / "out" / "check-pqss.json").read_text())
    entries = doc["suites"]["pqss"][0]["entries"]
    assert any(e["object"] == "0.1:0" and not e["pass"] for e in entries)


def test_guard_exit_code(tmp_path, capsys):
    assert run(tmp_path, "catalog", "--config", A2, "--box", "100", "--no-cache") == 3
    assert "resource guard" in capsys.readouterr().err


def test_hn_command(tmp_path, capsys):
    assert run(tmp_path, "hn", "--config", A2) == 0
    out = capsys.readouterr().out
    assert any(line.startswith("1.1:1") and "0.1:0 | 1.0:0" in line for line in out.splitlines())
    assert json.loads((tmp_path / "out" / "hn.json").read_text())["name"] == "hn"


def test_partition_command(tmp_path, capsys):
    assert run(tmp_path, "partition", "--config", A2) == 0
    out_dir = tmp_path / "out"
    for name in ("dt", "dt_exc", "tp", "defect", "partition-defect"):
        assert (out_dir / f"{name}.json").exists()
    table = (out_dir / "partition.txt").read_text()
    assert table in capsys.readouterr().out
    first = {p.name: p.read_bytes() for p in out_dir.iterdir() if not p.name.startswith("timings")}
    assert run(tmp_path, "partition", "--config", A2) == 0
    again = {p.name: p.read_bytes() for p in out_dir.iterdir() if not p.name.startswith("timings")}
    assert first == again


@pytest.mark.parametrize("element", ["hilb", "pi_hilb", "indicator"])
def test_series_command(tmp_path, capsys, element):
    assert run(tmp_path, "series", "--config", A2, "--element", element) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["name"] == element
    assert run(tmp_path, "series", "--config", A2, "--element", element, "--sign-twist", out="tw") == 0
    assert json.loads((tmp_path / "tw" / f"series-{element}.json").read_text())["sign_twisted"] is True
