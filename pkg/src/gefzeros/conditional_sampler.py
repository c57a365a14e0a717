"""Sampling zero configurations conditioned on rare zero-count events.

Two routes are provided.  The first is Metropolis-Hastings over the exact
joint zero density of the degree-N polynomial (Appendix-style change of
variables to root coordinates), with a hard hole constraint enforced by
rejecting proposals that enter the hole.  The second is constructive: pick
the target count k0 = floor(p r^2), force the k0-th coefficient to be large
and suppress the coefficients whose indices compete with it, and certify
the resulting zero count in |z| <= r by an explicit Rouche inequality.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .constants import E, q_of_p
from .rootfinder import ZeroConfig, argument_principle_count, roots
from .series_core import CoeffVector, log_b


class CoincidentZeros(ValueError):
    pass


class InfeasibleStart(ValueError):
    pass


# ---- exact joint density -----------------------------------------------------

@dataclass(frozen=True)
class JointDensityContext:
    """Degree, scale, log normalizing constant and the moment weights k!/L^(2k)."""

    N: int
    L: float
    log_A: float
    moment_logs: np.ndarray  # log(k!/L^(2k)) for k = 0..N


def make_context(N: int, L: float) -> JointDensityContext:
    if N < 1 or L <= 0:
        raise ValueError("need N >= 1 and L > 0")
    j = np.arange(1, N + 1, dtype=float)
    log_A = (gammaln(N + 1.0) + np.sum(gammaln(j + 1.0))
             - N * np.log(np.pi) - N * (N + 1.0) * np.log(L))
    k = np.arange(N + 1, dtype=float)
    return JointDensityContext(N=N, L=L, log_A=float(log_A),
                               moment_logs=gammaln(k + 1.0) - 2.0 * k * np.log(L))


def monic_coeffs(z: np.ndarray):
    """(chat, logscale): rescaled coefficients of prod (w - z_j), ascending in w.

    chat * exp(logscale) are the true coefficients; the running maximum is
    divided out after every factor so the expansion never overflows.
    """
    c = np.array([1.0 + 0j])
    logscale = 0.0
    for zj in z:
        c = np.convolve(c, np.array([1.0, -zj]))
        m = np.max(np.abs(c))
        if m > 1e100 or m < 1e-100:
            c /= m
            logscale += np.log(m)
    return c[::-1], logscale


def log_S(z: np.ndarray, ctx: JointDensityContext) -> float:
    """log of S(z) = sum_k |c_k|^2 k!/L^(2k), the squared mu_L-norm of the monic poly."""
    chat, ls = monic_coeffs(z)
    with np.errstate(divide="ignore"):
        return float(2.0 * ls + logsumexp(2.0 * np.log(np.abs(chat)) + ctx.moment_logs))


def _vandermonde_logsum(z: np.ndarray) -> float:
    d = np.abs(z[:, None] - z[None, :])
    iu = np.triu_indices(z.size, k=1)
    return float(2.0 * np.sum(np.log(d[iu])))


def log_joint_density(zc: ZeroConfig, ctx: JointDensityContext) -> float:
    """log f(z) = log_A + sum_{j != k} log|z_j - z_k| - (N+1) log S(z)."""
    z = zc.zeros
    if z.size != ctx.N:
        raise ValueError("configuration size must equal ctx.N")
    if z.size > 1:
        d = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(d, np.inf)
        if d.min() <= 1e-12:
            raise CoincidentZeros("zeros must be pairwise distinct")
    return ctx.log_A + _vandermonde_logsum(z) - (ctx.N + 1) * log_S(z, ctx)


# ---- Metropolis-Hastings with a hole constraint -------------------------------

def _divide_monic(c: np.ndarray, root: complex) -> np.ndarray:
    """Coefficients (ascending) of a monic polynomial divided by (w - root)."""
    n = c.size - 1
    b = np.empty(n, dtype=complex)
    b[n - 1] = c[n]
    for k in range(n - 1, 0, -1):
        b[k - 1] = c[k] + root * b[k]
    return b


def _multiply_root(b: np.ndarray, root: complex) -> np.ndarray:
    out = np.empty(b.size + 1, dtype=complex)
    out[0] = -root * b[0]
    out[1:-1] = b[:-1] - root * b[1:]
    out[-1] = b[-1]
    return out


@dataclass
class ChainResult:
    configs: list          # thinned post-burn ZeroConfig states
    acceptance_rate: float
    proposal_scale: float
    log_density_trace: np.ndarray


def mh_hole_chain(ctx: JointDensityContext, hole_radius: float, sweeps: int,
                  rng, proposal_scale: float | None = None, burn: int | None = None,
                  thin: int = 10, init: np.ndarray | None = None,
                  beta: float = 1.0) -> ChainResult:
    """Single-site Metropolis-Hastings for the joint zero density on {all |z_j| >= hole}.

    Proposals are isotropic Gaussians; a proposal inside the hole is rejected
    outright, which keeps detailed balance on the feasible region.  The
    proposal scale is tuned toward 25-40% acceptance during burn-in and then
    frozen.  Returns the thinned post-burn chain.

    beta is an inverse temperature multiplying the log-density in the accept
    ratio.  beta=1 samples the conditional law itself; larger values
    concentrate the chain near the energy-minimizing configuration, which is
    how the large-hole limit shape is exhibited at small N (the energy scale
    of the law grows like hole_radius^4, so finite-N samples at beta=1 keep
    substantial thermal fluctuations around the limit shape).
    """
    N, L = ctx.N, ctx.L
    alpha = N / L**2
    if hole_radius < 0:
        raise ValueError("hole_radius must be >= 0")
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if init is None:
        r0 = max(1.05 * hole_radius, np.sqrt(alpha) / 2.0)
        init = r0 * np.exp(2j * np.pi * (np.arange(N) + 0.3) / N)
    z = np.asarray(init, dtype=complex).copy()
    if z.size != N:
        raise ValueError("init must have N points")
    if np.any(np.abs(z) < hole_radius):
        raise InfeasibleStart("initial configuration enters the hole")
    if burn is None:
        burn = max(200, sweeps // 5)
    scale = proposal_scale if proposal_scale else 0.5 / L

    c = np.array([1.0 + 0j])
    for zj in z:
        c = np.convolve(c, np.array([1.0, -zj]))
    c = c[::-1]
    lsq = 2.0 * np.log(np.abs(c) + 1e-300)
    logS = float(logsumexp(lsq + ctx.moment_logs))
    vand = np.log(np.abs(z[:, None] - z[None, :]) + np.where(np.eye(N, dtype=bool), 1.0, 0.0))
    np.fill_diagonal(vand, 0.0)

    accepted = 0
    proposed = 0
    window_acc = 0
    window_prop = 0
    configs = []
    trace = []
    for sweep in range(sweeps + burn):
        # periodic full refresh to stop incremental drift
        cc = np.array([1.0 + 0j])
        for zj in z:
            cc = np.convolve(cc, np.array([1.0, -zj]))
        c = cc[::-1]
        logS = float(logsumexp(2.0 * np.log(np.abs(c) + 1e-300) + ctx.moment_logs))
        for j in range(N):
            proposed += 1
            window_prop += 1
            znew = z[j] + scale * (rng.standard_normal() + 1j * rng.standard_normal())
            if abs(znew) < hole_radius:
                continue
            others = np.delete(z, j)
            dold = np.abs(z[j] - others)
            dnew = np.abs(znew - others)
            if dnew.min() <= 1e-12:
                continue
            b = _divide_monic(c, z[j])
            cnew = _multiply_root(b, znew)
            logS_new = float(logsumexp(2.0 * np.log(np.abs(cnew) + 1e-300) + ctx.moment_logs))
            dlogf = beta * (2.0 * (np.sum(np.log(dnew)) - np.sum(np.log(dold)))
                            - (N + 1) * (logS_new - logS))
            if dlogf >= 0 or np.log(rng.random()) < dlogf:
                z[j] = znew
                c = cnew
                logS = logS_new
                accepted += 1
                window_acc += 1
        if sweep < burn:
            if window_prop >= 50 * N:
                rate = window_acc / window_prop
                if rate < 0.25:
                    scale *= 0.8
                elif rate > 0.40:
                    scale *= 1.25
                window_acc = window_prop = 0
        else:
            k = sweep - burn
            if k % thin == 0:
                configs.append(ZeroConfig(zeros=z.copy(), smoothing_t=1e-3))
                trace.append(ctx.log_A + _vandermonde_logsum(z) - (N + 1) * logS)
    return ChainResult(configs=configs,
                       acceptance_rate=accepted / max(proposed, 1),
                       proposal_scale=scale,
                       log_density_trace=np.array(trace))


# ---- smoothed empirical energy and the discrete functional -------------------

def smoothed_energy(zc: ZeroConfig) -> float:
    """Sigma of the t-smoothed empirical measure (each zero spread on a circle of radius t).

    Pair interactions equal log|z_j - z_k| once the circles are disjoint
    (distance >= 2t); closer pairs use a 64-point angular quadrature of the
    circle-circle kernel, and each circle contributes self-energy log t.
    """
    z = zc.zeros
    t = zc.smoothing_t
    N = z.size
    if N == 1:
        return np.log(t)
    d = np.abs(z[:, None] - z[None, :])
    iu = np.triu_indices(N, k=1)
    dv = d[iu]
    with np.errstate(divide="ignore"):
        K = np.log(dv)
    close = dv < 2.0 * t
    if np.any(close):
        theta = 2.0 * np.pi * np.arange(64) / 64.0
        ring = t * np.exp(1j * theta)
        # inner circle average is exact (log max); outer one is the quadrature
        vals = np.log(np.maximum(np.abs(dv[close, None] + ring[None, :]), t))
        K[close] = np.mean(vals, axis=1)
    return float((2.0 * np.sum(K) + N * np.log(t)) / N**2)


@dataclass(frozen=True)
class DiscreteFunctional:
    B_alpha: float
    sigma_t: float
    I_alpha: float
    I_star: float | None
    argmax_w: complex


def functional_I_discrete(zc: ZeroConfig, alpha: float, L: float | None = None,
                          n_rad: int = 200, n_ang: int = 128) -> DiscreteFunctional:
    """I_alpha(mu_z^t): probe-grid obstacle sup of the point-mass potential minus
    the smoothed energy; also reports the raw discrete form with weight L^2/(2N)."""
    z = zc.zeros
    N = z.size
    rad = np.linspace(0.0, np.sqrt(alpha), n_rad)
    ang = np.exp(2j * np.pi * np.arange(n_ang) / n_ang)
    w = (rad[:, None] * ang[None, :]).ravel()
    with np.errstate(divide="ignore"):
        U = np.mean(np.log(np.abs(w[:, None] - z[None, :]) + 1e-300), axis=1)
    obstacle = U - np.abs(w) ** 2 / (2.0 * alpha)
    jstar = int(np.argmax(obstacle))
    B = 2.0 * float(obstacle[jstar])
    sig = smoothed_energy(zc)
    I_star = None
    if L is not None:
        raw = U - (L * L / (2.0 * N)) * np.abs(w) ** 2
        pair = 2.0 * (_vandermonde_logsum(z) / 2.0) / N**2
        I_star = 2.0 * float(np.max(raw)) - pair
    return DiscreteFunctional(B_alpha=B, sigma_t=sig, I_alpha=B - sig,
                              I_star=I_star, argmax_w=complex(w[jstar]))


# ---- constructive rare-event sampler ------------------------------------------

def _truncated_abs_sq(bound: float, rng) -> float:
    """|xi|^2 for a standard complex Gaussian conditioned on |xi| <= bound (inverse CDF)."""
    u = rng.random()
    return -np.log1p(u * np.expm1(-bound * bound))


def _draw_conditioned(bound_low: float | None, bound_high: float | None, rng) -> complex:
    """Standard complex Gaussian conditioned on a modulus window (exact inverse CDF)."""
    if bound_low is not None:
        s2 = bound_low**2 + rng.exponential()  # memorylessness of |xi|^2 ~ Exp(1)
    elif bound_high is not None:
        s2 = _truncated_abs_sq(bound_high, rng)
    else:
        s2 = rng.exponential()
    return np.sqrt(s2) * np.exp(2j * np.pi * rng.random())


class RareEventSample:
    """Coefficients forcing n(r) = k0, with the Rouche certificate.

    certificate.holds means |xi_k0| b_k0 strictly dominates the sum of all
    the other |xi_k| b_k, which pins the count in the closed disk of radius
    r to exactly k0 for the truncated polynomial.
    """

    def __init__(self, coeffs: CoeffVector, k0: int, r: float,
                 rouche_margin: float, holds: bool):
        self.coeffs = coeffs
        self.k0 = k0
        self.r = r
        self.certificate = {"rouche_margin": rouche_margin, "holds": holds}
        self._zeros = None

    @property
    def zeros(self) -> ZeroConfig:
        if self._zeros is None:
            self._zeros = roots(self.coeffs)
        return self._zeros

    def count_in_disk(self, quad_points: int = 2048) -> int:
        """Independent contour count of zeros in |z| <= r (no root extraction)."""
        return argument_principle_count(self.coeffs, self.r, quad_points)


def construct_rare_event(r: float, p: float, rng, C1: float = 2.0) -> RareEventSample:
    """Draw coefficients from the event forcing n(r) = k0 = floor(p r^2).

    The competitor window I_p is [p, q(p)] for p < 1, [q(p), p] for 1 < p < e,
    and [0, p] for p >= e.  Indices with k/r^2 in the window are suppressed
    below A_{p,k}/(6 r^2 (k+1)^(2 C1)) (the 4 p r^2 variant for p >= e);
    remaining indices up to N = floor(a(p) r^2) + 1 are suppressed below
    1/(70 r^2 (k+1)^C1) (variant 24 r^2); indices in (N, 4N] stay unconditional.
    """
    if r < 3 or p < 0 or p == 1.0:
        raise ValueError("need r >= 3, p >= 0, p != 1")
    r2 = r * r
    k0 = int(np.floor(p * r2))
    q = q_of_p(p)
    if p < 1.0:
        window = (p, q)
    elif p < E:
        window = (q, p)
    else:
        window = (0.0, p)
    a_tail = 16.0 if p <= 11.0 else 5.0 + p
    N = int(np.floor(a_tail * r2)) + 1
    n_total = 4 * N
    k = np.arange(n_total + 1)
    xi = np.empty(n_total + 1, dtype=complex)

    in_window = (k / r2 >= window[0]) & (k / r2 <= window[1]) & (k != k0) & (k <= N)
    close = (~in_window) & (k != k0) & (k <= N)
    lb = log_b(k, r)
    xi[k0] = _draw_conditioned(1.0, None, rng)
    main_bound = np.full(n_total + 1, np.inf)
    iw = np.nonzero(in_window)[0]
    if p < E:
        main_bound[iw] = np.exp(lb[k0] - lb[iw]) / (6.0 * r2 * (iw + 1.0) ** (2.0 * C1))
        close_bound = 1.0 / (70.0 * r2 * (k + 1.0) ** C1)
    else:
        main_bound[iw] = np.exp(lb[k0] - lb[iw]) / (4.0 * p * r2 * (iw + 1.0) ** (2.0 * C1))
        close_bound = 1.0 / (24.0 * r2 * (k + 1.0) ** C1)
    for idx in np.nonzero(in_window)[0]:
        xi[idx] = _draw_conditioned(None, float(main_bound[idx]), rng)
    for idx in np.nonzero(close)[0]:
        xi[idx] = _draw_conditioned(None, float(close_bound[idx]), rng)
    far = k > N
    nf = int(np.sum(far))
    xi[far] = (rng.standard_normal(nf) + 1j * rng.standard_normal(nf)) / np.sqrt(2.0)

    lt = np.log(np.abs(xi)) + lb
    l0 = lt[k0]
    lsum = float(logsumexp(np.delete(lt, k0)))
    holds = bool(l0 > lsum)
    if l0 < 700.0:
        margin = float(np.exp(l0) - np.exp(lsum))
    else:  # astronomically large main term: report the certified sign
        margin = np.inf if holds else -np.inf
    return RareEventSample(CoeffVector(xi, scale=1.0), k0, r, margin, holds)


# ---- Monte Carlo and histogram reductions -------------------------------------

def hole_probability_mc(r: float, samples: int, rng, batch: int = 4096,
                        quad_points: int = 128):
    """(estimate, stderr) of P[no zeros in |z| <= r] by plain Monte Carlo.

    Truncation degree N = ceil(4 r^2 + 40); the per-sample count is the
    winding number of the truncated polynomial around |z| = r, evaluated in
    vectorized batches.  A smoke check only: the r^4 asymptotics of the true
    hole probability are out of reach at Monte Carlo scale.
    """
    if r > 1.5:
        raise ValueError("hole probability is not MC-reachable beyond r ~ 1.2")
    N = int(np.ceil(4.0 * r * r + 40.0))
    k = np.arange(N + 1, dtype=float)
    theta = 2.0 * np.pi * np.arange(quad_points) / quad_points
    V = np.exp(log_b(k, r))[:, None] * np.exp(1j * k[:, None] * theta[None, :])
    Vk = k[:, None] * V
    holes = 0
    done = 0
    while done < samples:
        B = min(batch, samples - done)
        xi = (rng.standard_normal((B, N + 1)) + 1j * rng.standard_normal((B, N + 1))) / np.sqrt(2.0)
        P = xi @ V
        Pk = xi @ Vk
        counts = np.rint(np.mean((Pk / P).real, axis=1)).astype(int)
        holes += int(np.sum(counts == 0))
        done += B
    est = holes / samples
    stderr = np.sqrt(max(est * (1.0 - est), 1e-300) / samples)
    return est, stderr


@dataclass
class RadialHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    samples: int
    normalization: str = "per-area"

    def density(self) -> np.ndarray:
        """Mean zeros per unit area in each bin (or per sample if so normalized)."""
        if self.normalization == "per-sample":
            return self.counts / self.samples
        area = np.pi * np.diff(self.bin_edges**2)
        return self.counts / (self.samples * area)

    def mass_between(self, lo: float, hi: float) -> float:
        """Mean zeros per sample in bins fully inside [lo, hi]."""
        sel = (self.bin_edges[:-1] >= lo) & (self.bin_edges[1:] <= hi)
        return float(np.sum(self.counts[sel])) / self.samples

    def boundary_bin_mass(self, radius: float = 1.0) -> float:
        """Mean zeros per sample in the bin straddling the given radius."""
        i = int(np.searchsorted(self.bin_edges, radius, side="right")) - 1
        i = min(max(i, 0), self.counts.size - 1)
        return float(self.counts[i]) / self.samples


def radial_histogram(samples, bins=40, window=None,
                     normalization: str = "per-area") -> RadialHistogram:
    """Histogram the zero radii of a batch or chain of configurations."""
    arrays = [s.zeros if isinstance(s, ZeroConfig) else np.asarray(s) for s in samples]
    if not arrays:
        raise ValueError("need at least one sample")
    radii = np.abs(np.concatenate(arrays))
    if window is None:
        window = (0.0, float(radii.max()) * 1.001 if radii.size else 1.0)
    if np.isscalar(bins):
        edges = np.linspace(window[0], window[1], int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    counts, _ = np.histogram(radii, bins=edges)
    return RadialHistogram(bin_edges=edges, counts=counts.astype(float),
                           samples=len(arrays), normalization=normalization)
