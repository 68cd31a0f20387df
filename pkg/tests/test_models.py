import pytest

from threegroup_mcp.models import (
    HYPOTHESES,
    AdjustedQuartet,
    Hypothesis,
    ProcedureKind,
    PValueQuartet,
    Scenario,
    pair_hypothesis,
)

QUARTET = PValueQuartet(p12=0.027, p13=0.0005, p23=0.037, p123=0.0002)


def test_quartet_lookup_by_hypothesis() -> None:
    assert QUARTET.get(Hypothesis.h12) == 0.027
    assert QUARTET.get(Hypothesis.h13) == 0.0005
    assert QUARTET.get(Hypothesis.h23) == 0.037
    assert QUARTET.get(Hypothesis.h123) == 0.0002
    assert QUARTET.as_dict() == {
        Hypothesis.h12: 0.027,
        Hypothesis.h13: 0.0005,
        Hypothesis.h23: 0.037,
        Hypothesis.h123: 0.0002,
    }


def test_quartet_relabel_moves_pairwise_p_values() -> None:
    # Swap groups 1 and 3: H12 <-> H23, H13 stays.
    swapped = QUARTET.relabel({1: 3, 2: 2, 3: 1})
    assert swapped == PValueQuartet(p12=0.037, p13=0.0005, p23=0.027, p123=0.0002)
    assert QUARTET.relabel({1: 1, 2: 2, 3: 3}) == QUARTET


def test_adjusted_quartet_lookup_and_global_bound() -> None:
    scenario = Scenario(kind=ProcedureKind.closed)
    adjusted = AdjustedQuartet(scenario=scenario, q12=0.03, q13=0.01, q23=0.04, q123=0.01, stepone_min=0.01)
    assert [adjusted.get(h) for h in HYPOTHESES] == [0.03, 0.01, 0.04, 0.01]
    with pytest.raises(ValueError):
        AdjustedQuartet(scenario=scenario, q12=0.03, q13=0.01, q23=0.04, q123=0.02, stepone_min=0.02)


def test_pair_hypothesis_is_unordered() -> None:
    assert pair_hypothesis(3, 1) == Hypothesis.h13
    with pytest.raises(ValueError):
        pair_hypothesis(2, 2)


def test_scenario_normalizes_primary_pair() -> None:
    scenario = Scenario(kind=ProcedureKind.shaffer, primary_pair=(3, 2))
    assert scenario.primary_pair == (2, 3)
    assert scenario.primary_hypothesis == Hypothesis.h23
    assert Scenario(kind=ProcedureKind.stepdown_dunnett, control=2).control_hypotheses == (Hypothesis.h12, Hypothesis.h23)
