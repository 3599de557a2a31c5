"""Closed-form stability and instability radii."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Union

INFINITE = "infinite"
Cardinality = Union[int, str]

TWO_NINTHS = 2 / 9
TWO_SEVENTEENTHS = 2 / 17
QUARTER = 0.25

CSV_HEADER = ("eps", "o_X", "o_prime_X", "two_sqrt_eps", "r17", "applicable_rz")


def _check_eps(eps: float, allow_zero: bool = False) -> None:
    lo_ok = eps >= 0 if allow_zero else eps > 0
    if not (lo_ok and eps < QUARTER) or math.isnan(eps):
        raise ValueError(f"eps must lie in {'[' if allow_zero else '('}0, 1/4), got {eps}")


def omega(n: int) -> float:
    """``(n^2 - 1) / (4 n^2)``."""
    if int(n) != n or n < 1:
        raise ValueError(f"omega needs a positive integer, got {n}")
    n = int(n)
    return (n * n - 1) / (4 * n * n)


def band_index(eps: float) -> int:
    """The n with ``omega(2n-1) <= eps < omega(2n+1)``."""
    _check_eps(eps, allow_zero=True)
    n = 1
    while not eps < omega(2 * n + 1):
        n += 1
    return n


def _card(card_x: Cardinality):
    if card_x == INFINITE:
        return None
    if int(card_x) != card_x or card_x < 2:
        raise ValueError(f"card X must be an integer >= 2 or 'infinite', got {card_x}")
    return int(card_x)


def o_X(eps: float, card_x: Cardinality) -> float:
    """Best radius for functionals (Y a single point)."""
    _check_eps(eps)
    k = _card(card_x)
    n = band_index(eps)
    s = math.sqrt(1 - 4 * eps)
    if k is None or 2 * n <= k:
        return (2 * n - 1 - s) / (2 * n)
    if k % 2 == 0:
        return (k - 1 - s) / k
    return (k - 1) / k


def o_prime_X(eps: float, n: int) -> float:
    """Best radius for discrete Y when X has ``n`` points."""
    _check_eps(eps)
    n = _card(n)
    if n is None:
        raise ValueError("o_prime_X needs a finite cardinality")
    if n % 2 == 1:
        if eps <= omega(n):
            return 2 * math.sqrt((n - 1) * eps / (n + 1))
        return (n - 1) / n
    return 2 * (n - 1) * math.sqrt(eps) / n


def gamma(t: float, eps: float) -> float:
    """``t - sqrt(t^2 - 4 eps)``, decreasing from ``2 sqrt(eps)`` on ``[2 sqrt(eps), 1]``."""
    _check_eps(eps)
    lo = 2 * math.sqrt(eps)
    if not (lo - 1e-12 <= t <= 1 + 1e-12):
        raise ValueError(f"t must lie in [2 sqrt(eps), 1] = [{lo}, 1], got {t}")
    # factored so the radicand vanishes exactly at t = 2 sqrt(eps)
    return t - math.sqrt(max((t - lo) * (t + lo), 0.0))


@dataclass(frozen=True)
class BoundParams:
    eps: float
    two_sqrt_eps: float = field(init=False)
    r9: float = field(init=False)
    r17: float = field(init=False)

    def __post_init__(self):
        _check_eps(self.eps)
        object.__setattr__(self, "two_sqrt_eps", 2 * math.sqrt(self.eps))
        object.__setattr__(self, "r9", math.sqrt(9 * self.eps / 2))
        object.__setattr__(self, "r17", math.sqrt(17 * self.eps / 2))

    @property
    def rz_applicable(self) -> bool:
        return self.eps < TWO_SEVENTEENTHS


def bound_table(eps_grid: Iterable[float], card_x: Cardinality) -> list[dict]:
    """One record of radii per eps.

    ``o_prime_X`` is None for infinite X, where it is not defined.
    """
    rows = []
    for eps in eps_grid:
        p = BoundParams(float(eps))
        finite = card_x != INFINITE
        rows.append({
            "eps": p.eps,
            "o_X": o_X(p.eps, card_x),
            "o_prime_X": o_prime_X(p.eps, card_x) if finite else None,
            "two_sqrt_eps": p.two_sqrt_eps,
            "r17": p.r17,
            "applicable_rz": p.rz_applicable,
        })
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return f"{v:.12g}"


def bound_table_csv(eps_grid: Iterable[float], card_x: Cardinality) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in bound_table(eps_grid, card_x):
        w.writerow([_fmt(rec[c]) for c in CSV_HEADER])
    return buf.getvalue()
