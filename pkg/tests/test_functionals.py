import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpstab.bounds import o_X
from dpstab.calculus import dist_to_wcm, epsilon_exact, row_max_disjoint_product
from dpstab.functionals import (abs_functional, check_atom_lemmas,
                                extremal_functional, max_atom)
from dpstab.model import FunctionalVec
from oracles import all_subset_sums, brute_row_product


def by_source(certs):
    return {c.claim_source: c for c in certs}


def test_abs_functional():
    for w, e in [([0.5, -0.5], 0.25), ([-1, 0], 0.0), ([0.75, -0.25], 0.1875)]:
        phi = FunctionalVec(w)
        a = abs_functional(phi)
        assert a.weights.tolist() == [abs(v) for v in w]
        assert a.norm == phi.norm
        assert row_max_disjoint_product(a.weights)[0] == e
        assert brute_row_product(w) == e


def test_max_atom():
    assert max_atom(FunctionalVec([0.75, 0.25])) == (0, 0.75)
    assert max_atom(FunctionalVec([1 / 3] * 3))[0] == 0
    assert max_atom(FunctionalVec([0.2, -0.8])) == (1, 0.8)


def test_lemmas_on_three_quarters():
    c = by_source(check_atom_lemmas(FunctionalVec([0.75, 0.25]), 3 / 16))
    assert c["atom-existence"].passed
    assert c["atom-uniqueness"].passed and c["atom-uniqueness-second"].passed
    assert all(x.status != "fail" for x in c.values())


def test_lemmas_on_uniform_three():
    c = by_source(check_atom_lemmas(FunctionalVec([1 / 3] * 3), 2 / 9))
    assert c["atom-existence"].passed
    assert c["atom-existence"].achieved_value == pytest.approx(c["atom-existence"].claimed_bound)
    assert c["atom-uniqueness"].status == "not-applicable"
    assert c["functional-stability"].passed


def test_lemmas_near_quarter_precondition():
    # the defect of (1/2, 1/2) is 1/4, above the requested eps
    certs = check_atom_lemmas(FunctionalVec([0.5, 0.5]), 0.25 - 1e-9)
    assert [c.status for c in certs] == ["not-applicable"]
    certs = check_atom_lemmas(FunctionalVec([0.5, 0.5]), 0.25 - 1e-13)
    assert [c.status for c in certs] == ["not-applicable"]
    # just inside the slack the lemmas are read at the exact defect
    phi = FunctionalVec([0.75, 0.25])
    certs = check_atom_lemmas(phi, 3 / 16 - 1e-13)
    assert by_source(certs)["atom-uniqueness"].passed


def test_lemmas_not_applicable_for_bad_norm():
    certs = check_atom_lemmas(FunctionalVec([0.5, 0.2]), 0.2)
    assert [c.status for c in certs] == ["not-applicable"]


@pytest.mark.parametrize("k,eps,weights,dist", [
    (2, 3 / 16, [0.75, 0.25], 0.25),
    (3, 0.23, [1 / 3] * 3, 2 / 3),
    (4, 2 / 9, [1 / 3, 1 / 3, 1 / 3, 0], 2 / 3),
])
def test_extremal_examples(k, eps, weights, dist):
    phi = extremal_functional(k, eps)
    assert phi.weights == pytest.approx(weights, abs=1e-15)
    assert dist_to_wcm(phi.as_operator())[0] == pytest.approx(dist, abs=1e-12)
    assert dist == pytest.approx(o_X(eps, k), abs=1e-12)


def test_extremal_three_quarters_defect():
    phi = extremal_functional(2, 3 / 16)
    assert epsilon_exact(phi.as_operator())[0] == 0.1875


def test_extremal_rejects():
    with pytest.raises(ValueError):
        extremal_functional(1, 0.1)
    with pytest.raises(ValueError):
        extremal_functional(3, 0.25)


EPS_GRID = [round(0.01 * i, 2) for i in range(1, 25)]


@pytest.mark.parametrize("k", range(2, 10))
def test_extremal_grid(k):
    for eps in EPS_GRID:
        phi = extremal_functional(k, eps)
        assert (phi.weights >= 0).all()
        assert phi.norm == pytest.approx(1, abs=1e-12)
        e = epsilon_exact(phi.as_operator())[0]
        assert e <= eps + 1e-12
        assert dist_to_wcm(phi.as_operator())[0] == pytest.approx(o_X(eps, k), abs=1e-12)
        s = math.sqrt(max(1 - 4 * e, 0))
        for x in all_subset_sums(phi.weights):
            assert not ((1 - s) / 2 + 1e-12 < x < (1 + s) / 2 - 1e-12)
        assert not any(c.failed for c in check_atom_lemmas(phi, eps))


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1), st.floats(0.01, 0.249))
def test_sampled_functionals_pass_lemmas(k, seed, eps):
    w = np.random.default_rng(seed).exponential(size=k)
    phi = FunctionalVec(w / w.sum())
    e = epsilon_exact(phi.as_operator())[0]
    if e > eps:
        return
    certs = check_atom_lemmas(phi, eps)
    assert certs and not any(c.failed for c in certs)
    assert all(c.status != "not-applicable" or c.claim_source != "check_atom_lemmas"
               for c in certs)
