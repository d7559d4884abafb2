"""Exact search-size arithmetic for the selection algorithms.

Counts are exact (Python integers, Bernoulli numbers as ``Fraction``), so the
closed form can be required to match the direct sum bit-for-bit rather than
approximately.  Conventions: B(1) = -1/2; with that sign the power-sum
formula evaluated at n gives sum_{t=0}^{n-1} t^p, which is exactly the count
the greedy recursion needs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import ConfigurationError

__all__ = [
    "bernoulli",
    "n_iter_exhaustive",
    "n_iter_greedy_direct",
    "n_iter_greedy_closed",
    "gain_ratio_exact",
    "gain_ratio_stirling",
]


@lru_cache(maxsize=None)
def bernoulli(j: int) -> Fraction:
    """Bernoulli number B_j as an exact rational, B_1 = -1/2 convention.

    Computed from the defining recurrence sum_{k=0}^{n} C(n+1, k) B_k = 0.
    """
    if j < 0:
        raise ConfigurationError("Bernoulli index must be >= 0")
    if j == 0:
        return Fraction(1)
    acc = sum(math.comb(j + 1, k) * bernoulli(k) for k in range(j))
    return -acc / (j + 1)


def _power_sum_below(p: int, n: int) -> Fraction:
    """sum_{t=0}^{n-1} t^p via the Bernoulli closed form (0^0 = 1)."""
    return sum(
        (math.comb(p + 1, j) * bernoulli(j) * Fraction(n) ** (p + 1 - j)
         for j in range(p + 1)),
        start=Fraction(0),
    ) / (p + 1)


def _check_domain(r_sel: int, n_s: int, num_users: int) -> None:
    if n_s < 1 or r_sel < n_s:
        raise ConfigurationError(f"need 1 <= n_s <= r_sel, got n_s={n_s}, r_sel={r_sel}")
    if num_users < 1:
        raise ConfigurationError("num_users must be >= 1")


def n_iter_exhaustive(r_sel: int, n_s: int, num_users: int) -> int:
    """Search size of the exhaustive selectors: C(r_sel, n_s)^num_users."""
    _check_domain(r_sel, n_s, num_users)
    return math.comb(r_sel, n_s) ** num_users


def n_iter_greedy_direct(r_sel: int, n_s: int, num_users: int) -> int:
    """Greedy search size, summed iteration by iteration.

    Iteration m scans (r_sel - m + 1)^num_users tuples; this direct sum is
    the ground truth the closed form must reproduce exactly.
    """
    _check_domain(r_sel, n_s, num_users)
    return sum((r_sel - m + 1) ** num_users for m in range(1, n_s + 1))


def n_iter_greedy_closed(r_sel: int, n_s: int, num_users: int) -> int:
    """Greedy search size in closed form (binomial expansion + power sums).

    Expanding (r_sel - (m - 1))^U binomially and swapping the summation
    order gives sum_i C(U, i) r_sel^(U-i) (-1)^i S_i with
    S_i = sum_{t=0}^{n_s-1} t^i, evaluated here in exact rationals.  The
    result is integral by construction; a non-integer total would mean the
    algebra is wrong, so that is asserted rather than rounded away.
    """
    _check_domain(r_sel, n_s, num_users)
    total = sum(
        (math.comb(num_users, i) * Fraction(r_sel) ** (num_users - i)
         * (-1) ** i * _power_sum_below(i, n_s)
         for i in range(num_users + 1)),
        start=Fraction(0),
    )
    assert total.denominator == 1, "closed-form count must be an integer"
    return int(total)


def gain_ratio_exact(r_sel: int, n_s: int, num_users: int) -> float:
    """Exhaustive-to-greedy search-size ratio from the exact counts."""
    return float(Fraction(n_iter_exhaustive(r_sel, n_s, num_users),
                          n_iter_greedy_direct(r_sel, n_s, num_users)))


def _ln_stirling_factorial(n: int) -> float:
    """log of the Stirling factorial approximation sqrt(2 pi n) (n/e)^n."""
    return 0.5 * math.log(2.0 * math.pi * n) + n * (math.log(n) - 1.0)


def gain_ratio_stirling(r_sel: int, n_s: int, num_users: int) -> float:
    """Closed-form ratio approximation for quick large-parameter estimates.

    Numerator: the exhaustive count with every factorial in C(r_sel, n_s)
    replaced by its Stirling approximation (hence n_s < r_sel strictly — a
    zero factorial argument has no Stirling form).  Denominator: the greedy
    closed form with C(num_users, i) condensed to num_users^i / i! and the
    power sums truncated after the B_0 and B_1 Bernoulli terms (the B_1 term
    only exists for i >= 1).  Coarse by design; see the exact ratio for
    truth.
    """
    _check_domain(r_sel, n_s, num_users)
    if n_s == r_sel:
        raise ConfigurationError("Stirling ratio needs n_s < r_sel")
    ln_num = num_users * (_ln_stirling_factorial(r_sel)
                          - _ln_stirling_factorial(n_s)
                          - _ln_stirling_factorial(r_sel - n_s))
    den = 0.0
    i_factorial = 1.0
    for i in range(num_users + 1):
        if i > 0:
            i_factorial *= i
        power_sum = float(n_s) ** (i + 1)
        if i >= 1:
            power_sum -= 0.5 * (i + 1) * float(n_s) ** i
        den += ((float(num_users) ** i / i_factorial) * float(r_sel) ** (num_users - i)
                * (-1.0) ** i * power_sum / (i + 1))
    return math.exp(ln_num) / den
