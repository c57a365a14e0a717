"""Gaussian Taylor coefficients and stable evaluation of their polynomial sums.

The random object everything else derives from is a vector of i.i.d.
standard complex Gaussians xi_0..xi_N (density exp(-|w|^2)/pi, E|xi|^2 = 1)
together with a scale L.  The polynomial

    P(z) = sum_k xi_k (L z)^k / sqrt(k!)

has coefficient magnitudes spanning many hundreds of orders of magnitude
for the parameter ranges of interest, so every magnitude here is carried
in the log domain with phases kept separately.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class CoeffVector:
    """Coefficients xi_0..xi_N plus the scale L of the argument."""

    coeffs: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coeffs must be a nonempty 1-D sequence")
        if not (self.scale > 0):
            raise ValueError("scale L must be positive")

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1


@dataclass(frozen=True)
class TruncationPlan:
    """Degree window and perturbation/smoothing radii for a disk of radius r.

    lam = log r; the admissible degree window is [N0, N1] with
    N0 = floor(lam r^2) + 1 and N1 = floor(2 lam r^2) + 1, and
    gamma = smoothing_t = r^(-C2).
    """

    r: float
    lam: float
    N0: int
    N1: int
    gamma: float
    smoothing_t: float
    C2: float

    def alpha(self, N: int) -> float:
        """Degree-to-area ratio alpha = N / r^2 (at most 3 log r in-window)."""
        return N / self.r**2


def split_streams(seed, n: int):
    """n reproducible independent generators from one master seed.

    Counter-based splitting: the i-th stream is the same regardless of how
    many streams are consumed concurrently elsewhere.
    """
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def sample_coeffs(n: int, rng) -> CoeffVector:
    """n+1 i.i.d. standard complex Gaussians (E|xi|^2 = 1), scale left at 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    z = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    return CoeffVector(z / np.sqrt(2.0))


def log_b(k, r):
    """log of r^k / sqrt(k!), i.e. k log r - 0.5 log k! via log-gamma.

    Exact 0 at k=0.  Accepts scalar or array k.
    """
    k = np.asarray(k, dtype=float)
    out = k * np.log(r) - 0.5 * gammaln(k + 1.0)
    return out if out.ndim else float(out)


def stirling_bounds(k: int):
    """(lo, hi) with lo <= log k! <= hi: lo = k log(k/e), hi = log(3 sqrt(k)) + k log(k/e)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    base = k * (np.log(k) - 1.0)
    return base, np.log(3.0) + 0.5 * np.log(k) + base


@dataclass(frozen=True)
class LogComplex:
    """A complex value stored as (log magnitude, phase)."""

    log_abs: float
    phase: float

    @property
    def value(self) -> complex:
        return np.exp(self.log_abs) * np.exp(1j * self.phase)


def _term_logmag_phase(c: CoeffVector, z, deriv: int = 0):
    """Per-term log magnitudes and phases of the deriv-th derivative at points z.

    Term k of the d-th derivative is
        xi_k * k!/(k-d)! * L^d * (Lz)^(k-d) / sqrt(k!).
    Returns (logmag, phase) arrays of shape (len(z), N+1-d).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    N = c.degree
    d = deriv
    if N < d:
        raise ValueError("derivative order exceeds degree")
    k = np.arange(d, N + 1, dtype=float)
    xi = c.coeffs[d:]
    L = c.scale
    with np.errstate(divide="ignore"):
        lz = np.log(np.abs(L * z))  # -inf at z=0 is fine: only the k=d term survives
        lxi = np.log(np.abs(xi))
    az = np.angle(L * z)
    base = 0.5 * gammaln(k + 1.0) - gammaln(k - d + 1.0) + d * np.log(L)
    with np.errstate(invalid="ignore"):
        logmag = lxi[None, :] + base[None, :] + (k - d)[None, :] * lz[:, None]
    # 0 * (-inf) from the k=d term at z=0: that power is (Lz)^0 = 1
    logmag[:, 0] = lxi[0] + base[0]
    phase = np.angle(xi)[None, :] + (k - d)[None, :] * az[:, None]
    return logmag, phase


def eval_poly_many(c: CoeffVector, z, deriv: int = 0):
    """Evaluate P (or a derivative) at many points; returns (log_abs, phase) arrays.

    Terms are rescaled by the per-point maximum log magnitude before summation,
    so nothing overflows even when individual terms span exp(+-r^4).
    """
    logmag, phase = _term_logmag_phase(c, z, deriv)
    M = np.max(logmag, axis=1)
    M = np.where(np.isfinite(M), M, 0.0)
    s = np.sum(np.exp(logmag - M[:, None] + 1j * phase), axis=1)
    with np.errstate(divide="ignore"):
        return M + np.log(np.abs(s)), np.angle(s)


def eval_poly(c: CoeffVector, z, deriv: int = 0) -> LogComplex:
    """P(z) (or its deriv-th derivative) as a (log magnitude, phase) pair."""
    la, ph = eval_poly_many(c, [z], deriv)
    return LogComplex(float(la[0]), float(ph[0]))


def tail_envelope(N: int, B: float, lam: float) -> float:
    """Log envelope (N/2) log(16 B^2 / lam) for the tail beyond degree N on |z| <= B r.

    Valid for lam > 16 and B in [1, sqrt(lam)/2] (so the envelope is <= 0).
    """
    if not lam > 16:
        raise ValueError("lam must exceed 16")
    if not (1.0 <= B <= np.sqrt(lam) / 2.0):
        raise ValueError("B must lie in [1, sqrt(lam)/2]")
    return 0.5 * N * np.log(16.0 * B * B / lam)


def make_truncation_plan(r: float, C2: float = 4.0) -> TruncationPlan:
    """Degree window and radii for disk radius r; requires r > e and C2 >= 4."""
    if not r > np.e:
        raise ValueError("r must exceed e so that lam = log r > 1")
    if C2 < 4:
        raise ValueError("C2 must be >= 4")
    lam = np.log(r)
    t = r ** (-C2)
    return TruncationPlan(
        r=r,
        lam=lam,
        N0=int(np.floor(lam * r * r)) + 1,
        N1=int(np.floor(2.0 * lam * r * r)) + 1,
        gamma=t,
        smoothing_t=t,
        C2=C2,
    )


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of the coefficient-regularity predicates for one sample."""

    coeff_bound_ok: bool      # |xi_k| <= sqrt(r^6 + k) for all k
    sum_sq_ok: bool           # sum |xi_k|^2 <= 3 lam r^4
    leading_ok: bool          # |xi_N| >= exp(-r^2)
    selected_degree: int | None  # smallest admissible k in the window, if any
    sum_sq: float
    sum_sq_limit: float

    @property
    def all_ok(self) -> bool:
        return self.coeff_bound_ok and self.sum_sq_ok and self.leading_ok


def regularity_check(c: CoeffVector, plan: TruncationPlan) -> RegularityReport:
    """Check the regularity predicates and apply the degree-selection rule.

    Selection picks the smallest k in [N0, min(N1, degree)] with
    |xi_k| >= exp(-r^2); the constant 3 in the square-sum budget is the one
    appearing in the displayed bound of the source inequality.
    """
    N = c.degree
    if not (plan.N0 <= N <= plan.N1):
        raise ValueError("degree must lie in the plan window [N0, N1]")
    r = plan.r
    a = np.abs(c.coeffs)
    k = np.arange(N + 1)
    coeff_ok = bool(np.all(a <= np.sqrt(r**6 + k)))
    ssq = float(np.sum(a * a))
    limit = 3.0 * plan.lam * r**4
    thresh = np.exp(-(r * r))
    window = np.arange(plan.N0, min(plan.N1, N) + 1)
    hits = window[a[window] >= thresh]
    return RegularityReport(
        coeff_bound_ok=coeff_ok,
        sum_sq_ok=ssq <= limit,
        leading_ok=bool(a[N] >= thresh),
        selected_degree=int(hits[0]) if hits.size else None,
        sum_sq=ssq,
        sum_sq_limit=limit,
    )
