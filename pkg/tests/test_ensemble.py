import numpy as np
import pytest

from kolmo import build_measure_tree, classify
from kolmo.core import ClassificationOutcome, OutcomeKind, ParameterError
from kolmo.sde import (
    SimConfig,
    distance_to_axes,
    estimate_outcome_frequencies,
    occupation_stats,
    simulate,
    survivor_pattern,
    verify_classification,
)
from kolmo.zoo import RPSParams, figure1_model, rps_model


def test_distance_to_axes():
    d = distance_to_axes(np.array([[1.0, 0.0, 0.0], [0.3, 0.4, 0.0], [1.0, 1.0, 1.0]]))
    assert d.tolist() == pytest.approx([0.0, 0.3, np.sqrt(2)])


def test_survivor_pattern_labels():
    cfg = SimConfig(t_final=60.0, dt=1e-3)
    t = simulate(figure1_model("i"), [0.5, 0.5, 0.5], cfg)
    assert survivor_pattern(t, occupation_stats(t), cfg.extinction_threshold) == frozenset({1})
    t = simulate(figure1_model("ix"), [0.5, 0.0, 0.5], cfg)
    assert survivor_pattern(t, occupation_stats(t), cfg.extinction_threshold) == frozenset({1, 3})


def test_low_but_not_decaying_is_unresolved():
    # every species sits below the threshold without decaying
    cfg = SimConfig(t_final=20.0, dt=1e-3, extinction_threshold=5.0)
    t = simulate(figure1_model("ix"), [0.5, 0.5, 0.5], cfg)
    assert survivor_pattern(t, occupation_stats(t), cfg.extinction_threshold) is None


def test_frequencies_single_attractor():
    f = estimate_outcome_frequencies(figure1_model("i"), [0.5, 0.5, 0.5], 10, SimConfig(t_final=60.0, dt=1e-3))
    assert f.frequencies == {frozenset({1}): 1.0}
    assert f.unresolved == 0
    f = estimate_outcome_frequencies(figure1_model("i"), [0.5, 0.5, 0.5], 1, SimConfig(t_final=60.0, dt=1e-3))
    assert list(f.frequencies.values()) == [1.0]
    assert f.to_dict()["frequencies"] == {"mu1": 1.0}


def test_verify_single_attractor_and_mismatch():
    m = figure1_model("i")
    cfg = SimConfig(t_final=60.0, dt=1e-3)
    rep = verify_classification(m, classify(build_measure_tree(m)), cfg, 5)
    assert rep.ok, rep.to_dict()
    wrong = ClassificationOutcome(OutcomeKind.PERSISTENCE)
    rep = verify_classification(m, wrong, cfg, 3)
    assert not rep.ok
    assert any(not c.passed for c in rep.checks)


def test_verify_persistence_logistics():
    m = figure1_model("ix")
    rep = verify_classification(m, classify(build_measure_tree(m)), SimConfig(t_final=100.0, dt=1e-2), 5)
    assert rep.ok, rep.to_dict()
    assert rep.metrics["min_time_average"] > 0.5


def test_verify_rps_boundary():
    m = rps_model(RPSParams(1.6, 0.9, 0.5))
    out = classify(build_measure_tree(m))
    rep = verify_classification(m, out, SimConfig(t_final=500.0, dt=1e-2, stride=10), 10)
    assert rep.ok, rep.to_dict()


def test_degenerate_outcome_is_not_verified():
    m = figure1_model("ix")
    rep = verify_classification(m, ClassificationOutcome(OutcomeKind.DEGENERATE), SimConfig(t_final=5.0), 1)
    assert rep.checks == [] and not rep.ok
    with pytest.raises(ParameterError):
        verify_classification(m, ClassificationOutcome(OutcomeKind.DEGENERATE), SimConfig(), 0)
