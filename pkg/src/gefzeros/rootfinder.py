"""Zero extraction, disk counts, and linear statistics for coefficient vectors.

Roots come from the companion matrix for moderate degrees and from
Aberth-Ehrlich simultaneous iteration beyond, both followed by Newton
polishing on the log-scaled evaluator.  An argument-principle contour
count serves as an independent oracle.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .series_core import CoeffVector, eval_poly_many

COMPANION_MAX_DEGREE = 512


class DegenerateLeadingCoefficient(ValueError):
    pass


class ResampleNeeded(RuntimeError):
    """Near-multiple roots detected; the model a.s. has simple zeros, so resample."""


class NearCircleRoot(RuntimeError):
    """Argument-principle quadrature unreliable: a root sits almost on the contour."""


@dataclass(frozen=True)
class ZeroConfig:
    """N complex zeros plus the smoothing radius used for empirical measures."""

    zeros: np.ndarray
    smoothing_t: float = 1e-4
    scale_note: str = "scaled"  # zeros of P(z) = sum xi_k (Lz)^k/sqrt(k!) live here

    def __post_init__(self):
        z = np.asarray(self.zeros, dtype=complex)
        object.__setattr__(self, "zeros", z)
        if z.size < 1:
            raise ValueError("need at least one zero")
        if not self.smoothing_t > 0:
            raise ValueError("smoothing_t must be positive")

    @property
    def n(self) -> int:
        return self.zeros.size


def _newton_polish(c: CoeffVector, z: np.ndarray, max_iter: int = 40) -> np.ndarray:
    """Newton steps z -= P/P' with the ratio formed from log-domain evaluations."""
    z = z.astype(complex).copy()
    for _ in range(max_iter):
        la0, ph0 = eval_poly_many(c, z, deriv=0)
        la1, ph1 = eval_poly_many(c, z, deriv=1)
        with np.errstate(over="ignore", invalid="ignore"):
            step = np.exp(la0 - la1) * np.exp(1j * (ph0 - ph1))
        step = np.where(np.isfinite(step), step, 0.0)
        tol = 1e-13 * np.maximum(1.0, np.abs(z))
        active = np.abs(step) > tol
        if not np.any(active):
            break
        # damp absurd steps (can happen before the iterate is in basin)
        cap = 0.5 * np.maximum(1.0, np.abs(z))
        big = np.abs(step) > cap
        step[big] *= (cap[big] / np.abs(step[big]))
        z[active] -= step[active]
    return z


def _log_coeffs(c: CoeffVector, sigma: float):
    """Log magnitudes and phases of the coefficients of P(sigma v) in v."""
    N = c.degree
    k = np.arange(N + 1, dtype=float)
    with np.errstate(divide="ignore"):
        lmag = np.log(np.abs(c.coeffs)) + k * np.log(c.scale * sigma) - 0.5 * gammaln(k + 1.0)
    return lmag, np.angle(c.coeffs)


def _aberth(c: CoeffVector, sigma: float, max_iter: int = 400,
            v0: np.ndarray | None = None) -> np.ndarray:
    """Aberth-Ehrlich simultaneous iteration in the rescaled variable v = z/sigma."""
    N = c.degree
    if v0 is not None:
        v = v0.astype(complex).copy()
    else:
        rng = np.random.default_rng(0)  # deterministic jitter of the starting circle
        theta = 2.0 * np.pi * (np.arange(N) + 0.5) / N + 0.01 * rng.standard_normal(N)
        v = (0.9 + 0.2 * rng.random(N)) * np.exp(1j * theta)
    cs = CoeffVector(c.coeffs, scale=c.scale * sigma)
    for _ in range(max_iter):
        la0, ph0 = eval_poly_many(cs, v, deriv=0)
        la1, ph1 = eval_poly_many(cs, v, deriv=1)
        with np.errstate(over="ignore", invalid="ignore"):
            w = np.exp(la0 - la1) * np.exp(1j * (ph0 - ph1))
        w = np.where(np.isfinite(w), w, 0.0)
        diff = v[:, None] - v[None, :]
        np.fill_diagonal(diff, np.inf)
        srep = np.sum(1.0 / diff, axis=1)
        corr = w / (1.0 - w * srep)
        v = v - corr
        if np.max(np.abs(corr)) < 1e-14 * np.max(np.abs(v)):
            break
    return v * sigma


def roots(c: CoeffVector, min_gap: float = 1e-14) -> ZeroConfig:
    """All N zeros of P, Newton-polished; raises ResampleNeeded on near-multiples."""
    N = c.degree
    if N < 1:
        raise ValueError("need degree >= 1 to extract zeros")
    k = np.arange(N + 1, dtype=float)
    with np.errstate(divide="ignore"):
        lead = np.log(np.abs(c.coeffs[N])) + N * np.log(c.scale) - 0.5 * gammaln(N + 1.0)
    if not np.isfinite(lead) or np.log(np.abs(c.coeffs[N]) + 1e-320) < -690:
        raise DegenerateLeadingCoefficient("leading coefficient vanishes in log domain")
    # balance coefficient magnitudes by rescaling the variable before companion
    sigma = np.sqrt(N) / c.scale if N > 1 else 1.0 / c.scale
    if N <= COMPANION_MAX_DEGREE:
        lmag, ph = _log_coeffs(c, sigma)
        lmag = lmag - np.max(lmag[np.isfinite(lmag)])
        a = np.exp(lmag) * np.exp(1j * ph)
        v = np.roots(a[::-1])
        z = v * sigma
    else:
        z = _aberth(c, sigma)

    def _collided(zz):
        if N == 1:
            return False
        d = np.abs(zz[:, None] - zz[None, :])
        np.fill_diagonal(d, np.inf)
        return d.min() < min_gap * max(1.0, np.abs(zz).max())

    zp = _newton_polish(c, z)
    if _collided(zp):
        # the companion multiset can be inaccurate enough at high degree that
        # independent Newton drags two starts into the same basin; the Aberth
        # correction keeps the iterates simultaneously distinct
        zp = _newton_polish(c, _aberth(c, sigma, v0=z / sigma))
    z = zp
    order = np.lexsort((z.imag, z.real))
    z = z[order]
    if _collided(z):
        raise ResampleNeeded("near-multiple roots; draw a fresh sample")
    return ZeroConfig(zeros=z)


def coeffs_from_roots(z, L: float = 1.0, lead: complex = 1.0) -> CoeffVector:
    """Synthetic CoeffVector whose polynomial has exactly the given roots.

    Inverts xi_k = mc_k sqrt(k!) L^(N-k) lead / sqrt(N!) where mc are the
    monic coefficients from Vieta expansion.  Test helper.
    """
    z = np.asarray(z, dtype=complex)
    N = z.size
    mc = np.array([1.0 + 0j])
    for zj in z:
        mc = np.convolve(mc, np.array([1.0, -zj]))
    mc = mc[::-1]  # mc[k] multiplies w^k
    k = np.arange(N + 1, dtype=float)
    xi = mc * np.exp(0.5 * gammaln(k + 1.0) - 0.5 * gammaln(N + 1.0) + (N - k) * np.log(L)) * lead
    return CoeffVector(xi, scale=L)


def count_in_disk(zc: ZeroConfig, rho: float) -> int:
    """Number of zeros with |z| <= rho."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    return int(np.sum(np.abs(zc.zeros) <= rho))


def argument_principle_count(c: CoeffVector, rho: float, quad_points: int = 4096) -> int:
    """Zeros inside |z| = rho by trapezoidal winding-number quadrature.

    Independent of root extraction.  The trapezoid rule on the circle is
    spectrally accurate as long as no root sits on the contour; a
    non-integer result signals exactly that and raises.
    """
    theta = 2.0 * np.pi * np.arange(quad_points) / quad_points
    z = rho * np.exp(1j * theta)
    la0, ph0 = eval_poly_many(c, z, deriv=0)
    la1, ph1 = eval_poly_many(c, z, deriv=1)
    ratio = np.exp(la1 - la0) * np.exp(1j * (ph1 - ph0))  # P'/P on the contour
    val = np.mean(ratio * z).real
    n = int(np.rint(val))
    if abs(val - n) > 0.25:
        raise NearCircleRoot(
            f"winding integral {val:.6f} not close to an integer at rho={rho}"
        )
    return n


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported test function with its support radius and a Lipschitz budget."""

    func: callable
    support_radius: float
    lipschitz: float

    def __call__(self, w):
        return self.func(w)

    def omega(self, delta: float) -> float:
        """Modulus of continuity budget omega(delta) = lipschitz * delta."""
        return self.lipschitz * delta


def linear_statistics(zc: ZeroConfig, phi, r: float) -> float:
    """Sum of phi(z_j / r) over the configuration."""
    w = zc.zeros / r
    f = phi.func if isinstance(phi, TestFunction) else phi
    return float(np.sum([f(wj) for wj in w]).real)


def perturbation_match(f_roots: ZeroConfig, g_roots: ZeroConfig, M: int,
                       gamma: float, phi: TestFunction, r: float):
    """(observed, budget) for the linear-statistics change under a perturbation.

    observed = |n_f(phi; r) - n_g(phi; r)|; budget = M * omega(phi; 2 M gamma / r),
    the worst case when at most M zeros each move by at most 2 M gamma.
    """
    lhs = abs(linear_statistics(f_roots, phi, r) - linear_statistics(g_roots, phi, r))
    rhs = M * phi.omega(2.0 * M * gamma / r)
    return lhs, rhs


def to_ndjson_record(zc: ZeroConfig, seed, N: int, L: float) -> str:
    """One NDJSON line: {seed, N, L, zeros: [[re, im], ...]}."""
    return json.dumps({
        "seed": seed,
        "N": N,
        "L": L,
        "zeros": [[float(z.real), float(z.imag)] for z in zc.zeros],
    })


def from_ndjson_record(line: str):
    rec = json.loads(line)
    z = np.array([complex(a, b) for a, b in rec["zeros"]])
    return ZeroConfig(zeros=z), rec
