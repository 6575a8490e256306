"""Exact moments and cumulants of small discrete laws, and the sixth-moment oracle.

For IID ``Z_1, ..., Z_m`` and ``m >= n`` the discrepancy

    D = (m - n) * (Z_1 + ... + Z_n) - n * (Z_{n+1} + ... + Z_m)

is a sum of two independent blocks, so its cumulants are
``kappa_j(D) = ((m - n)**j * n + (-n)**j * (m - n)) * kappa_j(Z)``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import comb, prod
from typing import Mapping, Sequence

from .kernel import parse_rational

__all__ = [
    "ENUMERATION_LIMIT",
    "EnumerationTooLarge",
    "cumulants_from_moments",
    "discrepancy_cumulant",
    "moments_from_cumulants",
    "raw_moments",
    "sixth_moment_from_cumulants",
    "sixth_moment_oracle",
    "unit_interval_cumulant_bounds",
    "universal_sixth_moment_constant",
]

ENUMERATION_LIMIT = 10**7


class EnumerationTooLarge(ValueError):
    pass


def _law(p) -> list[tuple[Fraction, Fraction]]:
    """Normalise a law given as ``{value: prob}`` or ``[(value, prob), ...]``."""
    items = p.items() if isinstance(p, Mapping) else p
    law = [(parse_rational(v), parse_rational(q)) for v, q in items]
    if any(q < 0 for _, q in law) or sum(q for _, q in law) != 1:
        raise ValueError("probabilities must be nonnegative and sum to 1")
    return [(v, q) for v, q in law if q]


def raw_moments(p, order: int) -> list[Fraction]:
    """``[E Z^0, ..., E Z^order]``."""
    law = _law(p)
    return [sum((q * v**k for v, q in law), Fraction(0)) for k in range(order + 1)]


def cumulants_from_moments(moments: Sequence[Fraction]) -> list[Fraction]:
    """Raw moments ``mu_0..mu_r`` to cumulants ``kappa_0..kappa_r`` (``kappa_0 = 0``).

    Uses ``kappa_n = mu_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k mu_{n-k}``.
    """
    kappa = [Fraction(0)] * len(moments)
    for n in range(1, len(moments)):
        kappa[n] = moments[n] - sum(comb(n - 1, k - 1) * kappa[k] * moments[n - k] for k in range(1, n))
    return kappa


def moments_from_cumulants(kappa: Sequence[Fraction]) -> list[Fraction]:
    """Inverse map: ``mu_n = sum_{k=1}^{n} C(n-1, k-1) kappa_k mu_{n-k}`` (complete Bell polynomials)."""
    mu = [Fraction(1)] + [Fraction(0)] * (len(kappa) - 1)
    for n in range(1, len(kappa)):
        mu[n] = sum(comb(n - 1, k - 1) * kappa[k] * mu[n - k] for k in range(1, n + 1))
    return mu


def discrepancy_cumulant(kappa_z: Fraction, j: int, n: int, m: int) -> Fraction:
    """``kappa_j(D)`` by additivity over the independent blocks of sizes ``n`` and ``m - n``."""
    return ((m - n) ** j * n + (-n) ** j * (m - n)) * kappa_z


def sixth_moment_from_cumulants(k2, k3, k4, k6) -> Fraction:
    """Sixth moment of a centred variable: ``k6 + 15 k4 k2 + 10 k3^2 + 15 k2^3``."""
    return k6 + 15 * k4 * k2 + 10 * k3**2 + 15 * k2**3


def sixth_moment_oracle(p, n: int, m: int) -> tuple[Fraction, Fraction]:
    """``(E[D^6] by brute force, E[D^6] from cumulants)``; both exact.

    The brute-force side enumerates every outcome in ``support**m`` with its IID
    weight.  Refuses when that exceeds :data:`ENUMERATION_LIMIT` outcomes.
    """
    if not 1 <= n <= m:
        raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
    law = _law(p)
    if len(law) ** m > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"{len(law)}**{m} outcomes exceed the enumeration limit {ENUMERATION_LIMIT}")

    brute = Fraction(0)
    for outcome in product(law, repeat=m):
        weight = prod((q for _, q in outcome), start=Fraction(1))
        head = sum((v for v, _ in outcome[:n]), Fraction(0))
        tail = sum((v for v, _ in outcome[n:]), Fraction(0))
        brute += weight * ((m - n) * head - n * tail) ** 6

    kz = cumulants_from_moments(raw_moments(law, 6))
    kd = {j: discrepancy_cumulant(kz[j], j, n, m) for j in (1, 2, 3, 4, 6)}
    assert kd[1] == 0
    return brute, sixth_moment_from_cumulants(kd[2], kd[3], kd[4], kd[6])


def unit_interval_cumulant_bounds() -> dict[int, Fraction]:
    """Bounds on ``|kappa_j(Z)|`` valid for every ``[0, 1]``-valued ``Z``.

    With ``c_k`` the central moments, ``|Z - E Z| <= 1`` gives ``|c_k| <= c_2 <= 1/4``
    for ``k >= 2``; then ``kappa_2 = c_2``, ``kappa_3 = c_3``,
    ``kappa_4 = c_4 - 3 c_2^2`` and ``kappa_6 = c_6 - 15 c_4 c_2 - 10 c_3^2 + 30 c_2^3``
    are bounded term by term.
    """
    c = Fraction(1, 4)
    return {2: c, 3: c, 4: c + 3 * c**2, 6: c + 15 * c**2 + 10 * c**2 + 30 * c**3}


def universal_sixth_moment_constant() -> Fraction:
    """A constant ``C`` with ``E[D^6] <= C n^3 m^6`` for all ``[0, 1]`` laws and ``m >= n``.

    For ``m >= n`` and ``j >= 2``, ``(m - n)^j n + n^j (m - n) <= n m^j``, hence
    ``|kappa_j(D)| <= K_j n m^j``.  Each product of cumulants in the sixth-moment
    formula is then at most ``n^3 m^6`` times the matching product of the ``K_j``.
    Mixtures of IID laws (the exchangeable case) inherit the bound by averaging.
    """
    k = unit_interval_cumulant_bounds()
    return k[6] + 15 * k[4] * k[2] + 10 * k[3] ** 2 + 15 * k[2] ** 3
