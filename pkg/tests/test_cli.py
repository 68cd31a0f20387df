import json
from pathlib import Path

import pytest

from threegroup_mcp.cli import (
    AnalysisRequest,
    cmd_adjust,
    cmd_analyze,
    cmd_ci,
    cmd_example,
    cmd_simulate,
    example_inputs,
    parse_group_spec,
    parse_method,
    read_csv_groups,
    sim_scenario,
)
from threegroup_mcp.errors import ErrorCode, ExitCode, MultcompError
from threegroup_mcp.models import HYPOTHESES, Baseline, BaselineKind, Hypothesis, ProcedureKind, Scenario
from threegroup_mcp.report import render_json, render_text
from threegroup_mcp.utils import format_p

EXAMPLE_GROUPS = ("A=20:11.5:1.9", "B=20:12.8:1.9", "C=20:14.1:1.9")


def _write_csv(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "data.csv"
    path.write_text(text, encoding="utf-8")
    return path


def test_parse_group_spec() -> None:
    assert parse_group_spec("20:11.5:1.9", "1") == ("1", (20, 11.5, 1.9))
    assert parse_group_spec("drug=5:0:1", "2") == ("drug", (5, 0.0, 1.0))
    with pytest.raises(MultcompError) as info:
        parse_group_spec("20:11.5", "1")
    assert info.value.exit_code == ExitCode.usage_error


def test_parse_method_names_and_letters() -> None:
    assert parse_method("D") == Scenario(kind=ProcedureKind.stepdown_tukey)
    assert parse_method("stepdown-dunnett", control=3) == Scenario(kind=ProcedureKind.stepdown_dunnett, control=3)
    assert parse_method("anova-tukey") == Baseline(kind=BaselineKind.anova_tukey)
    with pytest.raises(MultcompError):
        parse_method("holm")


def test_analysis_request_needs_exactly_one_source(tmp_path: Path) -> None:
    with pytest.raises(ValueError):
        AnalysisRequest()
    with pytest.raises(ValueError):
        AnalysisRequest(csv=tmp_path / "x.csv", groups=EXAMPLE_GROUPS)


def test_analyze_summary_step_down_tukey_rejects_everything() -> None:
    document = cmd_analyze(AnalysisRequest(groups=EXAMPLE_GROUPS), methods=["D"])
    (decision,) = document.decisions
    assert decision.method == "stepdown-tukey"
    assert decision.rejected == HYPOTHESES
    assert document.meta.alpha == 0.05
    assert any("summary statistics" in note for note in document.meta.notes)
    assert [g.label for g in document.groups or ()] == ["A", "B", "C"]


def test_analyze_defaults_to_all_scenarios_with_baselines() -> None:
    document = cmd_analyze(AnalysisRequest(groups=EXAMPLE_GROUPS), baselines=["anova-bonferroni"])
    assert list(document.adjusted_p) == ["closed", "shaffer", "stepdown-dunnett", "stepdown-tukey"]
    assert document.decisions[-1].method == "anova-bonferroni"
    with pytest.raises(MultcompError):
        cmd_analyze(AnalysisRequest(groups=EXAMPLE_GROUPS), baselines=["closed"])


def test_analyze_reads_csv_in_first_appearance_order(tmp_path: Path) -> None:
    rows = ["group,value"]
    for label, values in (("ctrl", [1.0, 1.4, 0.8, 1.1]), ("low", [2.0, 2.5, 1.9]), ("high", [4.0, 3.1, 3.6, 3.9])):
        rows.extend(f"{label},{v}" for v in values)
    path = _write_csv(tmp_path, "\n".join(rows) + "\n")
    data = read_csv_groups(path)
    assert [g.label for g in data] == ["ctrl", "low", "high"]
    assert [g.index for g in data] == [1, 2, 3]
    document = cmd_analyze(AnalysisRequest(csv=path), methods=["closed"])
    assert document.meta.notes == ()
    assert document.raw_p is not None


def test_csv_with_two_groups_is_a_parse_error(tmp_path: Path) -> None:
    path = _write_csv(tmp_path, "group,value\na,1\na,2\nb,3\nb,4\n")
    with pytest.raises(MultcompError) as info:
        read_csv_groups(path)
    assert info.value.code == ErrorCode.parse_error
    assert info.value.exit_code == ExitCode.parse_error
    assert "expected exactly 3 groups" in info.value.message


def test_csv_bad_value_reports_line_and_column(tmp_path: Path) -> None:
    path = _write_csv(tmp_path, "group,value\na,1\nb,oops\nc,3\n")
    with pytest.raises(MultcompError) as info:
        read_csv_groups(path)
    assert "line 3, column 2" in info.value.message
    assert info.value.details == {"line": 3, "column": 2}


def test_csv_bad_header(tmp_path: Path) -> None:
    path = _write_csv(tmp_path, "label,y\na,1\n")
    with pytest.raises(MultcompError) as info:
        read_csv_groups(path)
    assert info.value.exit_code == ExitCode.parse_error


def test_csv_degenerate_data(tmp_path: Path) -> None:
    path = _write_csv(tmp_path, "group,value\na,1\na,1\nb,2\nb,2\nc,3\nc,3\n")
    with pytest.raises(MultcompError) as info:
        cmd_analyze(AnalysisRequest(csv=path))
    assert info.value.exit_code == ExitCode.degenerate_data


def test_summary_file(tmp_path: Path) -> None:
    path = tmp_path / "summary.json"
    path.write_text(
        json.dumps({"groups": [{"label": "x", "n": 20, "mean": m, "sd": 1.9} for m in (11.5, 12.8, 14.1)]}),
        encoding="utf-8",
    )
    document = cmd_analyze(AnalysisRequest(summary_file=path), methods=["closed"])
    assert document.raw_p is not None
    assert document.raw_p.p12 == pytest.approx(0.0347, abs=5e-4)

    path.write_text('{"groups": []}', encoding="utf-8")
    with pytest.raises(MultcompError) as info:
        cmd_analyze(AnalysisRequest(summary_file=path))
    assert info.value.code == ErrorCode.parse_error


def test_adjust_shaffer_matches_worked_example() -> None:
    document = cmd_adjust(0.027, 0.0003, 0.037, method="shaffer")
    adjusted = document.adjusted_p["shaffer"]
    assert (adjusted.q12, adjusted.q13, adjusted.q23, adjusted.q123) == (0.027, 0.027, 0.037, 0.027)
    assert document.decisions[0].rejected == HYPOTHESES


def test_adjust_closed() -> None:
    document = cmd_adjust(0.027, 0.0003, 0.037, 0.0002, method="closed")
    adjusted = document.adjusted_p["closed"]
    assert (adjusted.q12, adjusted.q13, adjusted.q23, adjusted.q123) == (0.027, 0.0003, 0.037, 0.0002)


def test_adjust_refuses_step_down_procedures_and_missing_global_p() -> None:
    with pytest.raises(MultcompError) as info:
        cmd_adjust(0.027, 0.0003, 0.037, 0.0002, method="stepdown-tukey")
    assert info.value.exit_code == ExitCode.usage_error
    assert "analyze" in info.value.message
    with pytest.raises(MultcompError) as info:
        cmd_adjust(0.027, 0.0003, 0.037, method="closed")
    assert info.value.exit_code == ExitCode.usage_error
    with pytest.raises(MultcompError):
        cmd_adjust(1.5, 0.1, 0.1, 0.1)


def test_ci_tukey_and_dunnett() -> None:
    request = AnalysisRequest(groups=EXAMPLE_GROUPS)
    tukey = cmd_ci(request)
    assert tukey.intervals is not None
    excluded = {interval.pair: interval.excludes_zero for interval in tukey.intervals.intervals}
    assert excluded == {(1, 2): False, (1, 3): True, (2, 3): False}

    dunnett = cmd_ci(request, family="dunnett", control=2)
    assert dunnett.intervals is not None
    assert [interval.pair for interval in dunnett.intervals.intervals] == [(2, 1), (2, 3)]

    equal = cmd_ci(AnalysisRequest(groups=("5:0:1", "5:0:1", "5:0:1")))
    assert equal.intervals is not None
    assert not any(interval.excludes_zero for interval in equal.intervals.intervals)


def test_example_reproduces_reported_grid() -> None:
    document = cmd_example()
    grid = {name: [format_p(adjusted.get(h)) for h in HYPOTHESES] for name, adjusted in document.adjusted_p.items()}
    assert grid == {
        "closed": ["0.027", "<0.001", "0.037", "<0.001"],
        "shaffer": ["0.027", "0.027", "0.037", "0.027"],
        "stepdown-dunnett": ["0.027", "<0.001", "0.037", "<0.001"],
        "stepdown-tukey": ["0.027", "<0.001", "0.037", "<0.001"],
    }
    decisions = {decision.method: decision.rejected for decision in document.decisions}
    assert decisions["anova-tukey"] == (Hypothesis.h13, Hypothesis.h123)
    assert document.paradox["anova-tukey"].implied_additional_false == 1
    assert any("0.0005" in note for note in document.meta.notes)
    (recomputed,) = document.supplementary
    assert recomputed.raw_p is not None
    assert recomputed.raw_p.p12 == pytest.approx(0.0347, abs=5e-4)


def test_example_inputs_reconstruct_single_step_values() -> None:
    inputs = example_inputs()
    assert inputs.tukey is not None and inputs.dunnett is not None
    assert inputs.tukey[Hypothesis.h12] == pytest.approx(0.068, abs=0.004)
    assert inputs.tukey[Hypothesis.h23] == pytest.approx(0.092, abs=0.004)
    assert inputs.tukey[Hypothesis.h13] == 0.0005
    assert 0.027 < inputs.dunnett[Hypothesis.h12] < 0.054


def test_simulate_reports_generator_and_seed() -> None:
    sc = sim_scenario((0.0, 0.0, 0.0), 1.0, (5, 5, 5), alpha=0.05, reps=200, seed=42)
    document = cmd_simulate("fwer", sc, ["unadjusted", "closed"])
    assert [record.method for record in document.estimates] == ["unadjusted", "closed"]
    assert document.meta.seed == 42
    assert document.meta.reps == 200
    assert document.meta.generator is not None and "Philox" in document.meta.generator


def test_simulate_agreement_reports_both_families() -> None:
    sc = sim_scenario((1.0, 0.0, -1.0), 1.0, (6, 6, 6), alpha=0.05, reps=200, seed=1)
    document = cmd_simulate("agreement", sc, ["closed", "stepdown-tukey"])
    assert [record.metric for record in document.estimates] == ["agreement:pairwise", "agreement:all"]
    with pytest.raises(MultcompError):
        cmd_simulate("agreement", sc, ["closed"])
    with pytest.raises(MultcompError):
        cmd_simulate("variance", sc, ["closed"])


def test_simulate_power_reports_all_metrics() -> None:
    sc = sim_scenario((1.0, 0.0, -1.0), 1.0, (6, 6, 6), alpha=0.05, reps=200, seed=1)
    document = cmd_simulate("power", sc, ["stepdown-tukey"])
    metrics = [record.metric for record in document.estimates]
    assert metrics[-3:] == ["power:avg_pairwise", "power:all_pairwise", "power:any_pairwise"]


def test_sim_scenario_validation() -> None:
    with pytest.raises(MultcompError) as info:
        sim_scenario((0.0, 0.0, 0.0), -1.0, (5, 5, 5), alpha=0.05, reps=10, seed=1)
    assert info.value.exit_code == ExitCode.usage_error


def test_text_and_json_render_the_same_document() -> None:
    document = cmd_example()
    text = render_text(document, trace=True)
    assert "<0.001" in text
    assert "Step 1:" in text
    payload = json.loads(render_json(document))
    for key in ("raw_p", "adjusted_p", "decisions", "paradox", "intervals", "estimates", "meta"):
        assert key in payload
    assert payload["raw_p"]["p13"] == 0.0005
    text_rejections = [line for line in text.splitlines() if line.strip().startswith("stepdown-tukey (alpha")]
    assert "H12, H13, H23, H123" in text_rejections[0]


def test_example_text_keeps_notes_with_their_section() -> None:
    text = render_text(cmd_example())
    reported_note = text.index("placeholder 0.0005")
    recomputed = text.index("Worked example (recomputed from summary statistics)")
    assert reported_note < recomputed
    assert text.index("rounded means and sds") > recomputed
