import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpstab.bounds import (INFINITE, BoundParams, band_index, bound_table,
                           bound_table_csv, gamma, o_X, o_prime_X, omega)


def test_omega_values():
    assert omega(1) == 0
    assert omega(2) == 3 / 16
    assert omega(3) == pytest.approx(2 / 9, abs=1e-15)
    with pytest.raises(ValueError):
        omega(0)


def test_omega_increasing_below_quarter():
    vals = [omega(n) for n in range(1, 200)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert max(vals) < 0.25


@pytest.mark.parametrize("eps,n", [(0.1, 1), (2 / 9, 2), (0.24, 3), (0.0, 1)])
def test_band_index_examples(eps, n):
    assert band_index(eps) == n


def test_band_index_inverts_omega():
    for n in range(1, 30):
        assert band_index(omega(2 * n - 1)) == n
    with pytest.raises(ValueError):
        band_index(0.25)


def test_o_X_examples():
    assert o_X(0.1, INFINITE) == pytest.approx((1 - math.sqrt(0.6)) / 2, abs=1e-12)
    assert o_X(0.1, INFINITE) == pytest.approx(0.1127016654, abs=1e-10)
    assert o_X(0.23, 3) == pytest.approx(2 / 3, abs=1e-15)
    assert o_X(2 / 9, 4) == pytest.approx(2 / 3, abs=1e-12)
    for bad in (0.0, 0.25, -1):
        with pytest.raises(ValueError):
            o_X(bad, 3)
    with pytest.raises(ValueError):
        o_X(0.1, 1)


def test_o_prime_examples():
    assert o_prime_X(0.1, 3) == pytest.approx(0.4472135955, abs=1e-10)
    assert o_prime_X(0.23, 3) == pytest.approx(2 / 3, abs=1e-15)
    assert o_prime_X(0.09, 2) == pytest.approx(0.3, abs=1e-15)


def test_gamma_examples():
    eps = 0.16
    assert gamma(2 * math.sqrt(eps), eps) == pytest.approx(0.8, abs=1e-15)
    assert gamma(1.0, eps) == pytest.approx(0.4, abs=1e-15)
    assert gamma(0.9, eps) > gamma(1.0, eps)
    with pytest.raises(ValueError):
        gamma(0.5, eps)


@given(st.floats(0.001, 0.2499))
def test_gamma_decreasing_and_bounded(eps):
    ts = np.linspace(2 * math.sqrt(eps), 1, 50)
    g = [gamma(t, eps) for t in ts]
    assert all(a >= b for a, b in zip(g, g[1:]))
    assert max(g) <= 2 * math.sqrt(eps) + 1e-15


def test_o_X_increasing_within_bands():
    for n in range(1, 6):
        lo, hi = omega(2 * n - 1), omega(2 * n + 1)
        grid = np.linspace(lo, hi, 400, endpoint=False)[1:]
        vals = [o_X(e, INFINITE) for e in grid]
        assert all(a < b for a, b in zip(vals, vals[1:]))


def test_o_prime_below_two_sqrt_eps():
    for n in range(2, 12):
        for eps in np.linspace(1e-4, 0.2499, 500):
            assert o_prime_X(eps, n) < 2 * math.sqrt(eps)


def test_params():
    p = BoundParams(0.01)
    assert p.r17 == pytest.approx(0.2915475947, abs=1e-10)
    assert p.r9 < p.r17 and p.two_sqrt_eps < p.r17
    assert not BoundParams(2 / 17).rz_applicable
    with pytest.raises(ValueError):
        BoundParams(0.0)


def test_bound_table():
    rec, = bound_table([0.01], 3)
    assert rec["r17"] == pytest.approx(0.2915475947, abs=1e-10)
    assert rec["applicable_rz"]
    rec, = bound_table([2 / 17], 3)
    assert not rec["applicable_rz"]
    with pytest.raises(ValueError):
        bound_table([0.0], 3)
    text = bound_table_csv([0.01, 0.1], INFINITE).splitlines()
    assert text[0] == "eps,o_X,o_prime_X,two_sqrt_eps,r17,applicable_rz"
    assert text[1].startswith("0.01,") and text[1].split(",")[2] == ""
    assert bound_table_csv([], 3).splitlines() == [text[0]]
