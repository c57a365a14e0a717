"""Scalar rate constants for zero-count deviations.

For a target count k0 = floor(p r^2) the large-deviation rate of
P[n(r) = k0] ~ exp(-Z_p r^4) is governed by the companion value q(p)
solving q(log q - 1) = p(log p - 1) on the other side of 1, and
Z_p = |integral of x log x from p to q(p)|.  The Ginibre analogue G_p and
the Jancovici-Lebowitz-Manificat exponents psi(b) for intermediate
fluctuations are included for comparison tables.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .series_core import log_b

E = float(np.e)


def q_of_p(p: float) -> float:
    """Companion value q != p with q(log q - 1) = p(log p - 1).

    q(0) = e, q(1) = 1, q(p) = 0 for p >= e; otherwise the root is
    bracketed on the far side of 1 and solved to ~1e-14 residual.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    if p == 0.0:
        return E
    if p == 1.0:
        return 1.0
    if p >= E:
        return 0.0
    c = p * (np.log(p) - 1.0)
    f = lambda q: q * (np.log(q) - 1.0) - c
    if p < 1.0:
        return brentq(f, 1.0, E, xtol=1e-15, rtol=1e-15)
    return brentq(f, 1e-300, 1.0, xtol=1e-15, rtol=8.9e-16)


def _x2_term(x: float) -> float:
    """x^2 (2 log x - 1), continued by 0 at x = 0 (4x the antiderivative of x log x)."""
    return 0.0 if x == 0.0 else x * x * (2.0 * np.log(x) - 1.0)


def z_const(p: float) -> float:
    """Rate constant Z_p = |integral_p^{q(p)} x log x dx| in closed form.

    Z_0 = e^2/4 (the hole rate), Z_1 = 0, and for p >= e the companion
    value is 0 so Z_p = p^2 (2 log p - 1)/4.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    q = q_of_p(p)
    return abs(_x2_term(q) - _x2_term(p)) / 4.0


@dataclass(frozen=True)
class RateConstant:
    """(p, q(p), Z_p) plus which deviation branch p falls on."""

    p: float
    q: float
    Z: float
    branch: str  # deficit | overcrowd | hole | saturated

    @staticmethod
    def at(p: float) -> "RateConstant":
        if p == 0.0:
            branch = "hole"
        elif p < 1.0:
            branch = "deficit"
        elif p < E:
            branch = "overcrowd"
        else:
            branch = "saturated"
        return RateConstant(p=p, q=q_of_p(p), Z=z_const(p), branch=branch)


def ginibre_g(p: float) -> float:
    """Ginibre rate constant G_p = |integral_1^p (1 - x + x log x) dx| in closed form."""
    if p < 0:
        raise ValueError("p must be >= 0")

    def anti(x):
        # antiderivative x - x^2/2 + (x^2/2) log x - x^2/4, continued at 0
        lx = 0.0 if x == 0.0 else (x * x / 2.0) * np.log(x)
        return x - x * x / 2.0 + lx - x * x / 4.0

    return abs(anti(p) - anti(1.0))


def jlm_exponent(b: float) -> float:
    """Fluctuation exponent psi(b): 2b-1 on (1/2,1], 3b-2 on [1,2], 2b beyond."""
    if b <= 0.5:
        raise ValueError("b must exceed 1/2")
    if b <= 1.0:
        return 2.0 * b - 1.0
    if b <= 2.0:
        return 3.0 * b - 2.0
    return 2.0 * b


def moderate_rate(a: float, b: float) -> float:
    """Coefficient 2a^3/3 of r^(3b-2) in the moderate-fluctuation log-probability.

    Only b in (4/3, 2) carries the two-sided statement (the lower bound alone
    extends down to b > 1), hence the range check.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if not (4.0 / 3.0 < b < 2.0):
        raise ValueError(
            "b must lie in (4/3, 2); the matching lower bound alone extends to (1, 2)"
        )
    return 2.0 * a**3 / 3.0


def main_term_logratio(p: float, k: int, r: float) -> float:
    """log of the coefficient-weight ratio b_{k0}/b_k with k0 = floor(p r^2).

    Its main term is (p/2) log(e/p) r^2 - (k/2) log(e r^2 / k); the deviation
    from that main term stays within C1 log(k+1) with C1 = 2, which the test
    harness sweeps.
    """
    if k < 1 or r <= 0 or p < 0:
        raise ValueError("need k >= 1, r > 0, p >= 0")
    k0 = int(np.floor(p * r * r))
    return float(log_b(k0, r) - log_b(k, r))


def main_term(p: float, k: int, r: float) -> float:
    """The explicit main term (p/2) log(e/p) r^2 - (k/2) log(e r^2 / k) (0 at p=0)."""
    lead = 0.0 if p == 0.0 else 0.5 * p * np.log(E / p) * r * r
    return lead - 0.5 * k * np.log(E * r * r / k)
