import json

import pytest

from threegroup_mcp.__main__ import build_parser, main
from threegroup_mcp.config import Settings
from threegroup_mcp.errors import ExitCode


def _clear_env(monkeypatch) -> None:
    for name in ("ALPHA", "REPS", "SEED", "WORKERS", "CHUNK_SIZE"):
        monkeypatch.delenv(f"THREEGROUP_MCP_{name}", raising=False)


def test_example_text(monkeypatch, capsys) -> None:
    _clear_env(monkeypatch)
    assert main(["example"]) == ExitCode.ok
    out = capsys.readouterr().out
    assert "Adjusted p-values" in out
    assert "B shaffer" in out
    assert "Only H13 was rejected" in out


def test_example_json(monkeypatch, capsys) -> None:
    _clear_env(monkeypatch)
    assert main(["example", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["meta"]["command"] == "example"
    assert set(payload["adjusted_p"]) == {"closed", "shaffer", "stepdown-dunnett", "stepdown-tukey"}
    assert payload["adjusted_p"]["shaffer"]["q13"] == 0.027


def test_analyze_with_group_flags(monkeypatch, capsys) -> None:
    _clear_env(monkeypatch)
    argv = ["analyze", "--group", "20:11.5:1.9", "--group", "20:12.8:1.9", "--group", "20:14.1:1.9", "--method", "D"]
    assert main([*argv, "--trace"]) == 0
    out = capsys.readouterr().out
    assert "rejected H12, H13, H23, H123" in out
    assert "Step 2" in out


def test_adjust_shaffer(monkeypatch, capsys) -> None:
    _clear_env(monkeypatch)
    code = main(["adjust", "--p12", "0.027", "--p13", "0.0003", "--p23", "0.037", "--method", "shaffer", "--format", "json"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    adjusted = payload["adjusted_p"]["shaffer"]
    assert [adjusted[k] for k in ("q12", "q13", "q23", "q123")] == [0.027, 0.027, 0.037, 0.027]


def test_adjust_step_down_tukey_is_a_usage_error(monkeypatch, capsys) -> None:
    _clear_env(monkeypatch)
    code = main(["adjust", "--p12", "0.027", "--p13", "0.0003", "--p23", "0.037", "--p123", "0.001", "--method", "D"])
    assert code == ExitCode.usage_error
    assert "error[usage_error]" in capsys.readouterr().err


def test_missing_input_source_is_a_usage_error(monkeypatch, capsys) -> None:
    _clear_env(monkeypatch)
    assert main(["analyze"]) == 64
    assert "exactly one of" in capsys.readouterr().err


def test_csv_parse_error_exit_code(monkeypatch, capsys, tmp_path) -> None:
    _clear_env(monkeypatch)
    path = tmp_path / "two.csv"
    path.write_text("group,value\na,1\na,2\nb,3\nb,4\n", encoding="utf-8")
    assert main(["analyze", "--csv", str(path)]) == ExitCode.parse_error
    assert "expected exactly 3 groups" in capsys.readouterr().err


def test_degenerate_csv_exit_code(monkeypatch, tmp_path) -> None:
    _clear_env(monkeypatch)
    path = tmp_path / "flat.csv"
    path.write_text("group,value\na,1\na,1\nb,2\nb,2\nc,3\nc,3\n", encoding="utf-8")
    assert main(["ci", "--csv", str(path)]) == ExitCode.degenerate_data


def test_unknown_flag_exits_with_usage_status(monkeypatch) -> None:
    _clear_env(monkeypatch)
    with pytest.raises(SystemExit) as info:
        main(["analyze", "--bogus"])
    assert info.value.code == 64


def test_simulate_json(monkeypatch, capsys) -> None:
    _clear_env(monkeypatch)
    argv = ["simulate", "fwer", "--means", "0,0,0", "--n", "5", "--methods", "unadjusted,closed", "--reps", "100"]
    assert main([*argv, "--seed", "3", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["meta"]["seed"] == 3
    assert payload["meta"]["reps"] == 100
    assert [record["method"] for record in payload["estimates"]] == ["unadjusted", "closed"]


def test_simulate_bad_triple_is_a_usage_error(monkeypatch) -> None:
    _clear_env(monkeypatch)
    with pytest.raises(SystemExit) as info:
        main(["simulate", "fwer", "--means", "0,0", "--n", "5", "--method", "closed"])
    assert info.value.code == 64


def test_environment_sets_defaults(monkeypatch) -> None:
    _clear_env(monkeypatch)
    monkeypatch.setenv("THREEGROUP_MCP_REPS", "250")
    monkeypatch.setenv("THREEGROUP_MCP_ALPHA", "0.1")
    from threegroup_mcp.config import settings_from_env

    args = build_parser(settings_from_env()).parse_args(["simulate", "power", "--means", "1,0,0", "--n", "4"])
    assert args.reps == 250
    assert args.alpha == 0.1
    assert args.n == (4, 4, 4)


def test_invalid_environment_exits_with_usage_status(monkeypatch, capsys) -> None:
    _clear_env(monkeypatch)
    monkeypatch.setenv("THREEGROUP_MCP_WORKERS", "many")
    assert main(["example"]) == 64
    assert "THREEGROUP_MCP_WORKERS" in capsys.readouterr().err


def test_parser_defaults_follow_settings() -> None:
    args = build_parser(Settings(alpha=0.01)).parse_args(["example"])
    assert args.alpha == 0.01
    assert args.format == "text"
