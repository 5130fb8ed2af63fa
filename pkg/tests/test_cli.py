"""Configuration, caching, subcommand behavior, and exit codes."""

import json
import os

import pytest

from etadelta import cli


def run(argv, monkeypatch, tmp_path):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    return cli.main(argv)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("primes=5,11\nM=4\nm_max.5=2\nformat=csv  # trailing\n")
    parser = cli.make_parser()
    args = parser.parse_args(["delta", "--config", str(cfg), "--M", "7"])
    config = cli.build_run_config(args)
    assert config.primes == (5, 11)
    assert config.M == 7  # flag wins over file
    assert config.m_max_for(5) == 2
    assert config.m_max_for(11) == 2  # default table
    assert config.fmt == "csv"


def test_config_validation_lists_all_problems():
    config = cli.RunConfig(primes=(3, 7, 11), fmt="xml", pole_orders=(0,))
    problems = config.validate()
    text = "\n".join(problems)
    assert "p = 3" in text
    assert "p = 7" in text
    assert "xml" in text
    assert "pole order 0" in text
    assert cli.RunConfig(primes=(5, 23)).validate() == []


def test_bad_config_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("primes 5\n")
    with pytest.raises(ValueError):
        cli.load_config(str(cfg))


def test_cache_roundtrip_and_corruption(tmp_path):
    d = str(tmp_path / "cache")
    cli.cache_store(d, "k1", "hello world\n")
    assert cli.cache_load(d, "k1") == "hello world\n"
    assert cli.cache_load(d, "missing") is None
    # corrupt the payload: checksum mismatch must read as a miss
    path = os.path.join(d, "k1.txt")
    with open(path, "a") as fh:
        fh.write("tampered\n")
    assert cli.cache_load(d, "k1") is None


def test_expand_known_form(monkeypatch, tmp_path, capsys):
    assert run(["expand", "g", "--prec", "20", "--format", "json"],
               monkeypatch, tmp_path) == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["terms"][:3] == [[1, "1"], [4, "-8"], [7, "20"]]
    # second call hits the cache and must be byte-identical
    assert run(["expand", "g", "--prec", "20", "--format", "json"],
               monkeypatch, tmp_path) == cli.EXIT_OK
    assert json.loads(capsys.readouterr().out) == payload


def test_expand_unknown_form(monkeypatch, tmp_path, capsys):
    assert run(["expand", "nosuch"], monkeypatch, tmp_path) == cli.EXIT_CONFIG
    assert "catalog" in capsys.readouterr().err


def test_represent_and_idempotent_cache(monkeypatch, tmp_path, capsys):
    assert run(["represent", "--pole", "1", "--prec", "40"],
               monkeypatch, tmp_path) == cli.EXIT_OK
    first = capsys.readouterr().out
    assert "provenance 0:-9 1:-6 2:-1" in first
    assert run(["represent", "--pole", "1", "--prec", "40"],
               monkeypatch, tmp_path) == cli.EXIT_OK
    assert capsys.readouterr().out == first


def test_represent_pole0_structured_error(monkeypatch, tmp_path, capsys):
    assert run(["represent", "--pole", "0"],
               monkeypatch, tmp_path) == cli.EXIT_CONFIG
    assert "pole order" in capsys.readouterr().err


def test_delta_rejects_split_prime(monkeypatch, tmp_path, capsys):
    assert run(["delta", "--p", "7"], monkeypatch, tmp_path) == cli.EXIT_CONFIG
    assert "splits" in capsys.readouterr().err


def test_delta_rejects_p3(monkeypatch, tmp_path, capsys):
    assert run(["delta", "--p", "3"], monkeypatch, tmp_path) == cli.EXIT_CONFIG


def test_delta_json_envelope(monkeypatch, tmp_path, capsys):
    code = run(["delta", "--p", "5", "--mmax", "2", "--M", "5"],
               monkeypatch, tmp_path)
    assert code == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["version"] == cli.VERSION
    assert payload["config"]["primes"] == [5]
    (report,) = payload["delta_reports"]
    assert report["verdict_delta_nonzero"] is True
    assert report["vp_delta"] == 0
    assert report["diff_valuations"] == ["3", "6"]
    assert report["alpha_slot"]["note"] == "representative-dependent"


def test_delta_csv_format(monkeypatch, tmp_path, capsys):
    code = run(["delta", "--p", "5", "--mmax", "1", "--M", "4",
                "--format", "csv"], monkeypatch, tmp_path)
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("p,representative,m,")
    assert len(lines) == 3  # header + m = 0, 1


def test_verify_unknown_suite(monkeypatch, tmp_path, capsys):
    assert run(["verify", "nosuch"], monkeypatch, tmp_path) == cli.EXIT_CONFIG


def test_verify_fast_suites(monkeypatch, tmp_path, capsys):
    code = run(["verify", "valence", "--format", "text"],
               monkeypatch, tmp_path)
    assert code == cli.EXIT_OK
    assert "valence: pass" in capsys.readouterr().out
    code = run(["verify", "oracle", "--format", "text"],
               monkeypatch, tmp_path)
    assert code == cli.EXIT_OK


def test_delta_parallel_jobs_match_serial(monkeypatch, tmp_path, capsys):
    serial = run(["delta", "--p", "5,11", "--mmax", "1", "--M", "4"],
                 monkeypatch, tmp_path)
    out_serial = json.loads(capsys.readouterr().out)
    parallel = run(["delta", "--p", "5,11", "--mmax", "1", "--M", "4",
                    "--jobs", "2"], monkeypatch, tmp_path)
    out_parallel = json.loads(capsys.readouterr().out)
    assert serial == parallel == cli.EXIT_OK
    # identical modulo timing fields
    for payload in (out_serial, out_parallel):
        payload["timings"] = None
        for report in payload["delta_reports"]:
            report["elapsed_seconds"] = None
        payload["config"]["jobs"] = None
    assert out_serial == out_parallel
