import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpstab.calculus import (ENUMERATION_LIMIT, SupportTooLargeError, dist_to_wcm,
                             epsilon_exact, nearest_wcm, op_norm, row_cost,
                             row_max_disjoint_product, wcm_feasible)
from dpstab.model import (OperatorMatrix, SpaceX, TopGraphY, WCMapModel,
                          operator_distance, wcm_as_matrix)
from oracles import all_subset_sums, brute_dist, brute_eps, brute_row_product


def path3():
    return OperatorMatrix(np.array([[1.0, 0.0], [0.4, 0.4], [0.0, 1.0]]),
                          SpaceX.of_size(2), TopGraphY.path(3))


def uniform(k):
    return OperatorMatrix.from_rows([[1 / k] * k], TopGraphY.singleton())


def test_op_norm():
    assert op_norm(OperatorMatrix.from_rows([[1, 0]])) == 1
    assert op_norm(OperatorMatrix.from_rows([[0.5, 0.5], [0.2, 0.1]])) == 1.0
    assert op_norm(uniform(3)) == pytest.approx(1, abs=1e-15)
    assert op_norm(OperatorMatrix.from_rows([[0, 0]])) == 0


def test_row_product_examples():
    v, _ = row_max_disjoint_product([1 / 3] * 3)
    assert v == pytest.approx(2 / 9, abs=1e-15)
    assert row_max_disjoint_product([1, 0])[0] == 0
    v, wit = row_max_disjoint_product([0.5, 0.3, 0.2])
    assert v == 0.25
    assert (wit.subset_a, wit.subset_b) == ((0,), (1, 2))


def test_row_product_uses_absolute_values():
    assert row_max_disjoint_product([0.5, -0.5])[0] == 0.25


def test_support_threshold():
    row_max_disjoint_product(np.full(ENUMERATION_LIMIT, 1.0))
    with pytest.raises(SupportTooLargeError, match="support exceeds enumeration threshold"):
        row_max_disjoint_product(np.full(ENUMERATION_LIMIT + 1, 1.0))
    # zeros do not count towards the support
    row_max_disjoint_product(np.r_[np.zeros(30), np.ones(3)])


def test_meet_in_the_middle_matches_direct():
    rng = np.random.default_rng(7)
    for _ in range(20):
        w = rng.exponential(size=rng.integers(15, 21))
        v, wit = row_max_disjoint_product(w)
        sums = np.array(all_subset_sums(w[:12]))
        # compare against the exact value from sorted full enumeration
        full = np.sort(np.concatenate([sums + s for s in all_subset_sums(w[12:])]))
        total = w.sum()
        assert v == pytest.approx(float((full * (total - full)).max()), rel=1e-12)
        assert wit.product == v


def test_epsilon_examples():
    eps, y, _ = epsilon_exact(OperatorMatrix.from_rows([[0.5, 0.5]]))
    assert eps == 0.25 and y == 0
    S = WCMapModel([0.3, -2.0], (1, 0), SpaceX.of_size(3), TopGraphY.edgeless(2))
    assert epsilon_exact(wcm_as_matrix(S))[0] == 0


def test_epsilon_first_row_wins_ties():
    T = OperatorMatrix.from_rows([[0.1, 0.0], [0.5, 0.5], [0.5, 0.5]])
    assert epsilon_exact(T)[1] == 1


def test_row_cost_examples():
    assert row_cost([0.7, 0.3], 0) == pytest.approx(0.3)
    assert row_cost([1, 0], 0) == 0
    for x in range(3):
        assert row_cost([1 / 3] * 3, x) == pytest.approx(2 / 3)


def test_feasibility_examples():
    Z = OperatorMatrix.from_rows([[0.0, 0.0]])
    w = wcm_feasible(Z, 0.0)
    assert w is not None and w.zero_set == (0,)
    w = wcm_feasible(path3(), 0.8)
    assert w.zero_set == (1,)
    assert w.label_map(3) == (0, None, 1)
    assert wcm_feasible(path3(), 0.79) is None


def test_distance_examples():
    d, _ = dist_to_wcm(uniform(3))
    assert d == pytest.approx(2 / 3, abs=1e-15)
    d, wit = dist_to_wcm(path3())
    assert d == pytest.approx(0.8) and wit.binding_vertex == 1
    S = WCMapModel([0.3, -2.0], (1, 1), SpaceX.of_size(3), TopGraphY.path(2))
    assert dist_to_wcm(wcm_as_matrix(S))[0] == 0


def test_nearest_wcm_examples():
    S = nearest_wcm(OperatorMatrix.from_rows([[0.8, 0.2]]))
    assert S.a.tolist() == [0.8] and S.h == (0,)
    S = nearest_wcm(path3())
    assert S.a.tolist() == [1, 0, 1] and S.h == (0, None, 1)
    W = wcm_as_matrix(WCMapModel([0.5, 0.5], (1, 1), SpaceX.of_size(2), TopGraphY.path(2)))
    assert nearest_wcm(W).a.tolist() == [0.5, 0.5]


def test_nearest_wcm_zeroes_empty_labels():
    # y2 is kept with the label of y1 but has no mass there
    T = OperatorMatrix(np.array([[1.0, 0.0], [0.0, 0.1]]),
                       SpaceX.of_size(2), TopGraphY.path(2))
    d, _ = dist_to_wcm(T)
    S = nearest_wcm(T)
    assert S.h[1] is None or S.a[1] != 0
    assert operator_distance(T, S) == d


small_rows = st.integers(1, 4).flatmap(lambda k: st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.floats(-1, 1, allow_nan=False, width=32),
                                min_size=k, max_size=k), min_size=n, max_size=n)))


@st.composite
def small_instances(draw):
    rows = draw(small_rows)
    n = len(rows)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    T = OperatorMatrix(np.array(rows, dtype=float), SpaceX.of_size(len(rows[0])),
                       TopGraphY(tuple(range(n)), edges))
    return T


@settings(max_examples=150, deadline=None)
@given(small_instances())
def test_oracle_equivalence(T):
    assert epsilon_exact(T)[0] == pytest.approx(brute_eps(T.rows), abs=1e-12)
    d, wit = dist_to_wcm(T)
    assert d == pytest.approx(brute_dist(T.rows, T.graph_y.edges), abs=1e-12)
    S = nearest_wcm(T)
    assert operator_distance(T, S) == d


@settings(max_examples=100, deadline=None)
@given(small_instances(), st.floats(0.1, 10))
def test_scaling(T, c):
    e, d = epsilon_exact(T)[0], dist_to_wcm(T)[0]
    cT = T.scaled(c)
    assert epsilon_exact(cT)[0] == pytest.approx(c * c * e, abs=1e-12)
    assert dist_to_wcm(cT)[0] == pytest.approx(c * d, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(small_instances(), st.randoms(use_true_random=False))
def test_permutation_and_sign_invariance(T, rnd):
    perm = list(range(T.k))
    rnd.shuffle(perm)
    signs = np.array([rnd.choice((-1.0, 1.0)) for _ in range(T.rows.size)]).reshape(T.rows.shape)
    U = OperatorMatrix(T.rows[:, perm] * signs, T.space_x, T.graph_y)
    assert epsilon_exact(U)[0] == pytest.approx(epsilon_exact(T)[0], abs=1e-12)
    assert dist_to_wcm(U)[0] == pytest.approx(dist_to_wcm(T)[0], abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(small_instances())
def test_generic_bounds(T):
    n = op_norm(T)
    assert dist_to_wcm(T)[0] <= n + 1e-15
    assert epsilon_exact(T)[0] <= n * n / 4 + 1e-15


@settings(max_examples=100, deadline=None)
@given(small_instances())
def test_edgeless_closed_form(T):
    T = T.as_discrete()
    a = np.abs(T.rows)
    assert dist_to_wcm(T)[0] == pytest.approx((a.sum(1) - a.max(1)).max(), abs=1e-12)
    if op_norm(T) == 0:
        return
    U = T.scaled(1 / op_norm(T))
    e = epsilon_exact(U)[0]
    if e < 0.25:
        assert dist_to_wcm(U)[0] <= 2 * math.sqrt(e) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=8))
def test_gap_property(w):
    w = np.array(w)
    if w.sum() == 0:
        return
    w = w / w.sum()
    e, _ = row_max_disjoint_product(w)
    assert e == pytest.approx(brute_row_product(w), abs=1e-12)
    # x(1 - x) <= e says x avoids the open gap around 1/2; this form stays
    # well conditioned when e is close to 1/4
    for x in all_subset_sums(w):
        assert x * (1 - x) <= e + 1e-12
