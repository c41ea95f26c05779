import numpy as np
import pytest
from hypothesis import given, strategies as st

from kolmo.core import (
    ClassificationOutcome,
    ErgodicMeasureInfo,
    KolmogorovModel,
    LVModel,
    NoiseCovariance,
    NotPositiveDefinite,
    OutcomeKind,
    ParameterError,
    Tolerances,
    complement,
    format_support,
    parse_support,
    subcommunity,
    support_label,
    validate_lv,
)


def test_complement_examples():
    assert complement({1}, 3) == {2, 3}
    assert complement(set(), 3) == {1, 2, 3}
    assert complement({1, 2, 3}, 3) == frozenset()
    with pytest.raises(ParameterError):
        complement({4}, 3)


@given(st.lists(st.integers(1, 3)))
def test_subcommunity_canonical_idempotent(xs):
    s = subcommunity(xs)
    assert subcommunity(s) == s
    assert parse_support(format_support(s)) == s


def test_support_labels():
    assert support_label(()) == "delta*"
    assert support_label({3, 1}) == "mu13"
    assert format_support({2, 1}) == "{1,2}"
    assert parse_support("1,3") == {1, 3}
    assert parse_support("") == frozenset()


def test_noise_covariance_validation():
    NoiseCovariance(np.eye(2))
    with pytest.raises(NotPositiveDefinite):
        NoiseCovariance([[1, 2], [2, 1]])
    with pytest.raises(ParameterError):
        NoiseCovariance([[1, 0.1], [0.2, 1]])
    with pytest.raises(ParameterError):
        NoiseCovariance([[1, 0, 0], [0, 1, 0]])
    s = NoiseCovariance.isotropic(0.0625, 3)
    assert np.allclose(s.diag, 0.0625)
    assert s == NoiseCovariance(0.0625 * np.eye(3))
    assert hash(s) == hash(NoiseCovariance(0.0625 * np.eye(3)))


def test_lv_model_shapes_and_sigma_forms():
    m = LVModel([1, 1], -np.eye(2), 0.1)
    assert m.n == 2
    assert np.allclose(m.sigma.matrix, 0.1 * np.eye(2))
    assert np.allclose(LVModel([1, 1], -np.eye(2), [0.1, 0.2]).sigma.diag, [0.1, 0.2])
    with pytest.raises(ParameterError, match="A must be n×n"):
        LVModel([1, 1], [[-1, 0, 0], [0, -1, 0]], 0.1)
    with pytest.raises(ParameterError):
        LVModel([1, np.nan], -np.eye(2), 0.1)
    x = np.array([[0.5, 0.25], [1.0, 0.0]])
    assert np.allclose(m.f(x), 1 - x)
    assert np.array_equal(m.g(x), np.ones_like(x))


def test_lv_model_is_immutable():
    m = LVModel([1.0], [[-1.0]], 0.1)
    with pytest.raises(ValueError):
        m.m[0] = 2.0


def test_lv_permuted_and_scaled():
    A = np.arange(9.0).reshape(3, 3) - 10
    m = LVModel([1, 2, 3], A, np.diag([0.1, 0.2, 0.3]))
    p = m.permuted([2, 0, 1])
    assert np.array_equal(p.m, [3, 1, 2])
    assert p.A[0, 1] == A[2, 0]
    assert np.array_equal(p.sigma.diag, [0.3, 0.1, 0.2])
    s = m.scaled(2.0)
    assert np.array_equal(s.A, 2 * A) and np.array_equal(s.sigma.diag, [0.2, 0.4, 0.6])


def test_kolmogorov_model():
    k = KolmogorovModel(2, lambda x: 1 - np.asarray(x), 0.01)
    assert k.n == 2
    assert np.array_equal(k.g(np.zeros(2)), np.ones(2))
    with pytest.raises(ParameterError):
        KolmogorovModel(0, lambda x: x, 0.1)


def test_validate_lv_examples():
    ok = validate_lv(LVModel([1, 1, 1], -np.eye(3), 0.0625))
    assert ok.ok and bool(ok)
    A = -np.eye(3)
    A[0, 0] = 1
    rep = validate_lv(LVModel([1, 1, 1], A, 0.0625))
    assert any("a_ii must be negative" in v or "must be negative" in v for v in rep.violations)
    A = -np.eye(3)
    A[0, 1] = A[1, 0] = 1
    rep = validate_lv(LVModel([1, 1, 1], A, 0.0625))
    assert any("mutualistic pair forbidden" in v for v in rep.violations)
    A = -np.eye(3)
    A[0, 1] = 1
    rep = validate_lv(LVModel([1, 1, 1], A, 0.0625))
    assert any("requires" in v for v in rep.violations)


@given(st.permutations([0, 1, 2]), st.integers(0, 2**32 - 1))
def test_validate_lv_permutation_equivariant(perm, seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-2, 1, (3, 3))
    model = LVModel(rng.uniform(-1, 1, 3), A, 0.1)
    assert len(validate_lv(model).violations) == len(validate_lv(model.permuted(perm)).violations)


def test_tolerances_positive():
    Tolerances()
    with pytest.raises(ParameterError):
        Tolerances(tol_zero=0)


def test_measure_info_and_outcome_summary():
    r = ErgodicMeasureInfo({1}, [0.75, 0, 0], [0, 0.3, -0.15])
    assert r.label == "mu1"
    assert r.external() == {2: 0.3, 3: -0.15}
    assert r.max_external() == pytest.approx(0.3)
    o = ClassificationOutcome(OutcomeKind.ATTRACTOR_SET, measures=(r,))
    assert o.summary() == "AttractorSet {mu1}"
    p = ClassificationOutcome(OutcomeKind.PERSISTENCE, criterion=0.023625)
    assert "criterion +0.02362" in p.summary() or "criterion +0.02363" in p.summary()
