"""Single-point codomain: atom lemmas and the extremal functionals."""
from __future__ import annotations

import math

import numpy as np

from .bounds import TWO_NINTHS, band_index, o_X
from .calculus import dist_to_wcm, row_max_disjoint_product
from .model import TOL, Certificate, FunctionalVec


def abs_functional(phi: FunctionalVec) -> FunctionalVec:
    return FunctionalVec(np.abs(phi.weights))


def max_atom(phi: FunctionalVec) -> tuple[int, float]:
    """Index of the largest ``|weight|`` (first on ties) and that value."""
    w = np.abs(phi.weights)
    i = int(np.argmax(w))
    return i, float(w[i])


def check_atom_lemmas(phi: FunctionalVec, eps: float) -> list[Certificate]:
    """Certify the atom estimates that every eps-DP norm-one functional obeys.

    Lower bounds ``m >= L`` on the largest atom are stated as ``1 - m <= 1 - L``
    so that each certificate reads achieved <= claimed.
    """
    tag = "check_atom_lemmas"
    if not 0 <= eps < 0.25:
        return [Certificate.not_applicable(tag, f"eps={eps} outside [0, 1/4)")]
    if abs(phi.norm - 1) > TOL:
        return [Certificate.not_applicable(tag, f"norm {phi.norm!r} is not 1")]
    defect, wit = row_max_disjoint_product(phi.weights)
    if defect > eps + TOL:
        return [Certificate.not_applicable(
            tag, f"defect {defect!r} exceeds eps={eps!r}")]

    # a defect above eps by rounding alone would move sqrt(1 - 4 eps) by
    # about sqrt(TOL), so the lemmas are evaluated at the larger value
    eps = max(eps, defect)
    if eps >= 0.25:
        return [Certificate.not_applicable(tag, "defect is 1/4")]
    k = phi.k
    s = math.sqrt(1 - 4 * eps)
    w = np.sort(np.abs(phi.weights))[::-1]
    m = float(w[0])
    second = float(w[1]) if k > 1 else 0.0
    certs = [Certificate.check("atom-existence", 1 - s, 1 - m,
                               notes=[f"largest atom {m!r} >= sqrt(1-4eps) = {s!r}"])]

    if eps < TWO_NINTHS:
        certs.append(Certificate.check(
            "atom-uniqueness", (1 - s) / 2, 1 - m,
            notes=[f"largest atom {m!r} >= (1+sqrt(1-4eps))/2"]))
        certs.append(Certificate.check(
            "atom-uniqueness-second", (1 - s) / 2, second,
            notes=["every other atom <= (1-sqrt(1-4eps))/2"]))
    else:
        certs.append(Certificate.not_applicable("atom-uniqueness", "needs eps < 2/9"))

    if k % 2 == 0:
        certs.append(Certificate.check(
            "even-cardinality-atom", 1 - (1 + s) / k, 1 - m,
            notes=[f"largest atom >= (1+sqrt(1-4eps))/{k}"]))
    else:
        certs.append(Certificate.not_applicable("even-cardinality-atom", "k is odd"))

    n = band_index(eps)
    if k >= 2 * n:
        certs.append(Certificate.check(
            "band-cardinality-atom", 1 - (1 + s) / (2 * n), 1 - m,
            notes=[f"band n={n}; largest atom >= (1+sqrt(1-4eps))/{2 * n}"]))
    else:
        certs.append(Certificate.not_applicable(
            "band-cardinality-atom", f"needs card X >= 2n = {2 * n}"))

    # The subset sum nearest 1/2 is the one that enters the gap furthest.
    a_sum = float(np.abs(phi.weights)[list(wit.subset_a)].sum())
    lo, hi = (1 - s) / 2, (1 + s) / 2
    certs.append(Certificate.check(
        "gap-lemma", 0.0, min(a_sum - lo, hi - a_sum),
        notes=[f"no subset sum inside ({lo!r}, {hi!r}); nearest is {a_sum!r}"]))

    abs_defect, _ = row_max_disjoint_product(abs_functional(phi).weights)
    certs.append(Certificate.check("abs-functional-defect", 0.0,
                                   abs(abs_defect - defect)))

    if k >= 2:
        d, _ = dist_to_wcm(phi.as_operator())
        bound = o_X(eps, k) if eps > 0 else 0.0
        certs.append(Certificate.check(
            "functional-stability", bound, d, notes=[f"o_X(eps, {k}) = {bound!r}"]))
    return certs


def extremal_functional(card_x: int, eps: float) -> FunctionalVec:
    """Nonnegative norm-one functional at distance exactly ``o_X(eps, k)``."""
    k = int(card_x)
    if k != card_x or k < 2:
        raise ValueError(f"card X must be an integer >= 2, got {card_x}")
    if not 0 < eps < 0.25:
        raise ValueError(f"eps must lie in (0, 1/4), got {eps}")
    n = band_index(eps)
    s = math.sqrt(1 - 4 * eps)
    w = np.zeros(k)
    if 2 * n <= k:
        w[:2 * n - 1] = (1 + s) / (2 * n)
        # the remainder is 0 at band edges; keep rounding from making it negative
        w[2 * n - 1] = max((1 - (2 * n - 1) * s) / (2 * n), 0.0)
    elif k % 2 == 0:
        w[:k - 1] = (1 + s) / k
        w[k - 1] = max((1 - (k - 1) * s) / k, 0.0)
    else:
        w[:] = 1 / k
    return FunctionalVec(w)
