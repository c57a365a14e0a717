"""Independent numerical oracles used by the tests.

Everything here deliberately avoids the closed-form identities inside the
package: potentials are computed by genuine 2-D quadrature (angular average
plus radial integration), energies by iterated quadrature over the measure
components, and polynomial evaluation by compensated summation.  Slower and
less accurate than the library, but independent.
"""

import math

import numpy as np
from scipy.integrate import quad


def angular_avg_log(t: float, s: float) -> float:
    """(1/2pi) int log|t e^{i theta} - s| d theta by adaptive quadrature.

    The integrand has an integrable log singularity when t == s; quad with
    the singular point declared handles it.
    """
    if t == 0.0 and s == 0.0:
        return -np.inf

    def f(th):
        return 0.5 * np.log(t * t + s * s - 2.0 * t * s * np.cos(th))

    if abs(t - s) < 1e-12 * max(t, s):
        val, _ = quad(f, 1e-9, 2.0 * np.pi - 1e-9, limit=400)
    else:
        val, _ = quad(f, 0.0, 2.0 * np.pi, limit=400)
    return val / (2.0 * np.pi)


def potential_quad(nu, s: float) -> float:
    """U_nu(s) by quadrature over every component (no log max identity)."""
    u = 0.0
    for t, m in nu.atoms:
        u += m * angular_avg_log(t, s)
    for a, b, c in nu.annuli:
        val, _ = quad(lambda r: 2.0 * r * angular_avg_log(r, s), a, b,
                      points=[s] if a < s < b else None, limit=400)
        u += c * val
    return u


def energy_quad(nu) -> float:
    """Sigma(nu) = int U_nu d nu with U from potential_quad (outer quad/sums)."""
    total = 0.0
    for t, m in nu.atoms:
        total += m * potential_quad(nu, t)
    for a, b, c in nu.annuli:
        val, _ = quad(lambda r: 2.0 * r * potential_quad(nu, r), a, b, limit=200)
        total += c * val
    return total


def b_alpha_scan(nu, alpha: float, n: int = 20001):
    """Dense-grid sup of 2 (U_nu(s) - s^2/2alpha) using the library potential.

    Grid oracle for the maximizer search only (the potential values
    themselves are cross-checked separately against potential_quad).
    """
    from gefzeros.radial_measures import log_potential

    s = np.linspace(0.0, np.sqrt(alpha), n)
    vals = np.array([log_potential(nu, x) for x in s]) - s * s / (2.0 * alpha)
    j = int(np.argmax(vals))
    return 2.0 * vals[j], s[j]


def eval_poly_reference(coeffs, L: float, z: complex):
    """P(z) = sum xi_k (Lz)^k / sqrt(k!) by exact-factorial compensated summation.

    Only valid when no intermediate over/underflows (moderate N, |Lz|).
    """
    re, im = [], []
    w = 1.0 + 0.0j  # (Lz)^k
    for k, xi in enumerate(coeffs):
        term = complex(xi) * w / math.sqrt(math.factorial(k))
        re.append(term.real)
        im.append(term.imag)
        w *= L * z
    return complex(math.fsum(re), math.fsum(im))


def vieta_coeffs(roots):
    """Monic coefficients (ascending) of prod (z - root) by exact convolution."""
    c = np.array([1.0 + 0.0j])
    for r in roots:
        c = np.convolve(c, np.array([-r, 1.0 + 0.0j]))
    return c
