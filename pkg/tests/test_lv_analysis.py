import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kolmo.core import LVModel, NonpositiveMean, SingularSystem, Tolerances
from kolmo.lv_analysis import (
    build_measure_tree,
    detect_degeneracy,
    exponents_at,
    exponents_at_origin,
    lv_measure,
    pair_exists,
    solve_boundary_means,
)
from kolmo.zoo import RPSParams, figure1_model, rps_model

from helpers import random_tables


def test_origin_exponents():
    m = LVModel([1, 1, 1], -np.eye(3), 0.0625)
    assert np.allclose(exponents_at_origin(m), 0.96875)
    vi = figure1_model("vi")
    assert exponents_at_origin(vi)[1] == pytest.approx(-0.13125, abs=1e-15)
    m = LVModel([1, 1], -np.eye(2), [2.0, 0.5])
    assert exponents_at_origin(m)[0] == 0.0


def test_boundary_means_examples():
    rps = rps_model(RPSParams(1.2, 0.6, 0.5))
    assert np.allclose(solve_boundary_means(rps, {1}), [0.75, 0, 0], atol=1e-15)
    ii = figure1_model("ii")
    x = solve_boundary_means(ii, {1, 2})
    assert x[0] == pytest.approx(0.96875 / 3, abs=1e-12)
    assert x[1] == pytest.approx(0.96875 / 3, abs=1e-12)
    assert x[2] == 0.0
    sing = LVModel([1, 1, 1], [[-1, -1, 0], [-1, -1, 0], [0, 0, -1]], 0.1)
    with pytest.raises(SingularSystem) as e:
        solve_boundary_means(sing, {1, 2})
    assert e.value.support == {1, 2}
    neg = LVModel([1, 0.1], [[-1, -2], [-2, -1]], 0.01)
    with pytest.raises(NonpositiveMean):
        solve_boundary_means(neg, {1, 2})


def test_exponents_at_examples():
    rps = rps_model(RPSParams(1.2, 0.6, 0.5))
    lam = exponents_at(rps, lv_measure(rps, {1}))
    assert lam[1] == pytest.approx(0.30, abs=1e-12)
    assert lam[2] == pytest.approx(-0.15, abs=1e-12)
    assert abs(lam[0]) < 1e-12
    i = figure1_model("i")
    row = lv_measure(i, {1})
    assert row.exponent(2) == pytest.approx(-0.96875, abs=1e-12)
    assert row.exponent(3) == pytest.approx(-0.96875, abs=1e-12)


def test_measure_tree_examples():
    rps = build_measure_tree(rps_model(RPSParams(1.2, 0.6, 0.5)))
    assert set(rps.rows) == {frozenset(), frozenset({1}), frozenset({2}), frozenset({3})}
    ix = build_measure_tree(figure1_model("ix"))
    assert len(ix.rows) == 7
    for s, r in ix.rows.items():
        for j, v in r.external().items():
            assert v == pytest.approx(0.96875, abs=1e-12)
    dead = build_measure_tree(LVModel([-1, -1, -1], -np.eye(3), 0.1))
    assert set(dead.rows) == {frozenset()}


def test_degeneracy_detection():
    t = build_measure_tree(rps_model(RPSParams(1.3, 0.7, 0.5)))
    assert detect_degeneracy(t) == []
    m = LVModel([1, 1, 1], -np.eye(3), [2.0, 0.1, 0.1])
    t = build_measure_tree(m)
    assert (frozenset(), 1) in detect_degeneracy(t)
    assert frozenset({1}) in t.halted


def test_pair_exists_conditions():
    assert pair_exists(1, 1, 0.5, 0.5)
    assert not pair_exists(1, 1, -0.5, -0.5)
    assert pair_exists(1, -1, 0.5, None)
    assert not pair_exists(1, 1, 0.5, -0.5)
    assert not pair_exists(-1, -1, None, None)


def _assert_table_invariants(model, table):
    for s, r in table.rows.items():
        idx = [i - 1 for i in s]
        if s:
            resid = model.m[idx] + model.A[idx] @ r.mean - model.sigma.diag[idx] / 2
            assert np.max(np.abs(resid)) <= 1e-10
            assert np.all(r.mean[idx] > 0)
        assert np.all(r.mean[[i for i in range(model.n) if i + 1 not in s]] == 0)
        if len(s) == 1:
            (i,) = s
            assert table.origin.exponent(i) > 0
        if len(s) == 2:
            i, j = sorted(s)
            mi, mj = table.get({i}), table.get({j})
            assert pair_exists(table.origin.exponent(i), table.origin.exponent(j),
                               None if mi is None else mi.exponent(j),
                               None if mj is None else mj.exponent(i))


def test_random_tables_respect_invariants():
    for model, table in random_tables(11, 200):
        _assert_table_invariants(model, table)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.permutations([0, 1, 2]))
def test_permutation_equivariance(seed, perm):
    (model, table), = random_tables(seed, 1)
    pt = build_measure_tree(model.permuted(perm))
    expect = table.permuted(perm)
    assert set(pt.rows) == set(expect.rows)
    for s in pt.rows:
        assert np.allclose(pt[s].mean, expect[s].mean, atol=1e-12)
        assert np.allclose(pt[s].exponents, expect[s].exponents, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 2.0]))
def test_scaling_preserves_signs(seed, c):
    (model, table), = random_tables(seed, 1)
    st_ = build_measure_tree(model.scaled(c))
    assert set(st_.rows) == set(table.rows)
    for s in table.rows:
        assert np.allclose(st_[s].exponents, c * table[s].exponents, atol=1e-10)
        assert np.array_equal(np.sign(np.round(st_[s].exponents, 9)), np.sign(np.round(table[s].exponents, 9)))


def test_decoupled_invasion_equals_origin():
    m = LVModel([1, 0.5, 0.8], np.diag([-1, -2, -0.5]), [0.1, 0.2, 0.3])
    t = build_measure_tree(m)
    for s, r in t.rows.items():
        for j, v in r.external().items():
            assert v == t.origin.exponent(j)


def test_table_permuted_roundtrip():
    t = build_measure_tree(figure1_model("i"))
    p = t.permuted([1, 2, 0])
    assert frozenset({3}) in p.rows  # old species 1 is new species 3
    assert p.lam(1, {3}) == t.lam(2, {1})
