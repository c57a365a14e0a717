"""Exact potential theory for radial measures on the plane.

A RadialMeasure is a sum of uniform circle atoms and annuli with constant
planar density c * dm / pi.  For such measures the circle-average identity

    (1/2pi) int log|t e^{i theta} - z| d theta = log max(t, |z|)

makes logarithmic potentials, energies, and the obstacle value

    B_alpha(nu) = 2 sup_{|w| <= sqrt(alpha)} ( U_nu(w) - |w|^2 / (2 alpha) )

available in closed form.  The catalog() constructor builds the minimizing
measures of the constrained energy problem (disk mass pinned to p/alpha)
together with the equilibrium measure and the Ginibre analogue.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import E, q_of_p, z_const


class InfiniteEnergy(ValueError):
    pass


class NegativityViolation(RuntimeError):
    """The signed energy of a difference of probability measures came out positive."""


@dataclass(frozen=True)
class RadialMeasure:
    """Circle atoms [(radius, mass)] plus annuli [(r_lo, r_hi, c)] with density c dm/pi."""

    atoms: tuple = ()
    annuli: tuple = ()
    probability: bool = False
    label: str = ""

    def __post_init__(self):
        atoms = tuple((float(t), float(m)) for t, m in self.atoms)
        annuli = tuple((float(a), float(b), float(c)) for a, b, c in self.annuli)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "annuli", annuli)
        for t, m in atoms:
            if t < 0 or m <= 0:
                raise ValueError("atoms need radius >= 0 and mass > 0")
        last = -1.0
        for a, b, c in sorted(annuli):
            if not (0 <= a < b) or c <= 0:
                raise ValueError("annuli need 0 <= r_lo < r_hi and c > 0")
            if a < last - 1e-15:
                raise ValueError("annuli must not overlap")
            last = b
        if self.probability and abs(self.total_mass - 1.0) > 1e-12:
            raise ValueError("probability measure must have total mass 1")

    @property
    def total_mass(self) -> float:
        return (sum(m for _, m in self.atoms)
                + sum(c * (b * b - a * a) for a, b, c in self.annuli))

    def support_radius(self) -> float:
        r = max([t for t, _ in self.atoms], default=0.0)
        return max(r, max([b for _, b, _ in self.annuli], default=0.0))

    def mass_in_disk(self, t: float) -> float:
        """Mass of the closed disk of radius t."""
        m = sum(mm for rad, mm in self.atoms if rad <= t)
        for a, b, c in self.annuli:
            if t > a:
                m += c * (min(t, b) ** 2 - a * a)
        return m

    def second_moment(self) -> float:
        """int |z|^2 d nu in closed form."""
        m = sum(mm * t * t for t, mm in self.atoms)
        m += sum(c * (b**4 - a**4) / 2.0 for a, b, c in self.annuli)
        return m

    def to_json(self) -> str:
        return json.dumps({
            "atoms": [{"r": t, "mass": m} for t, m in self.atoms],
            "annuli": [{"lo": a, "hi": b, "c": c} for a, b, c in self.annuli],
        })

    @staticmethod
    def from_json(s: str) -> "RadialMeasure":
        d = json.loads(s)
        return RadialMeasure(
            atoms=tuple((a["r"], a["mass"]) for a in d["atoms"]),
            annuli=tuple((a["lo"], a["hi"], a["c"]) for a in d["annuli"]),
        )

    def _components(self):
        comps = [("atom", t, m) for t, m in self.atoms]
        comps += [("ann", a, b, c) for a, b, c in self.annuli]
        return comps


# ---- closed-form radial primitives ----------------------------------------

def _p1(x: float) -> float:
    """int 2u log u du = x^2 log x - x^2/2, continued by 0 at x=0."""
    return 0.0 if x == 0.0 else x * x * np.log(x) - x * x / 2.0


def _p3(x: float) -> float:
    """int 2u^3 log u du = x^4 log x / 2 - x^4/8, continued by 0 at x=0."""
    return 0.0 if x == 0.0 else x**4 * np.log(x) / 2.0 - x**4 / 8.0


def _int_2u_logmax(a: float, b: float, s: float) -> float:
    """int_a^b 2u log max(u, s) du for 0 <= a <= b."""
    if s <= a:
        return _p1(b) - _p1(a)
    if s >= b:
        return (0.0 if s == 0.0 else np.log(s)) * (b * b - a * a)
    return np.log(s) * (s * s - a * a) + _p1(b) - _p1(s)


def _pair_energy(c1, c2) -> float:
    """Mutual energy int int log|z - w| d c1(z) d c2(w) of two components."""
    if c1[0] == "atom" and c2[0] == "atom":
        _, t1, m1 = c1
        _, t2, m2 = c2
        t = max(t1, t2)
        if t == 0.0:
            raise InfiniteEnergy("atom at radius 0 has infinite self-energy")
        return m1 * m2 * np.log(t)
    if c1[0] == "atom" or c2[0] == "atom":
        atom, ann = (c1, c2) if c1[0] == "atom" else (c2, c1)
        _, t, m = atom
        _, a, b, c = ann
        return m * c * _int_2u_logmax(a, b, t)
    _, a1, b1, d1 = c1
    _, a2, b2, d2 = c2
    cuts = sorted({a1, b1, a2, b2})
    total = 0.0
    pieces1 = [(x, y) for x, y in zip(cuts, cuts[1:]) if a1 <= x and y <= b1]
    pieces2 = [(x, y) for x, y in zip(cuts, cuts[1:]) if a2 <= x and y <= b2]
    for x1, y1 in pieces1:
        for x2, y2 in pieces2:
            if x1 == x2 and y1 == y2:
                total += 2.0 * ((_p3(y1) - _p3(x1)) - x1 * x1 * (_p1(y1) - _p1(x1)))
            elif y1 <= x2:
                total += (y1 * y1 - x1 * x1) * (_p1(y2) - _p1(x2))
            else:  # y2 <= x1
                total += (y2 * y2 - x2 * x2) * (_p1(y1) - _p1(x1))
    return d1 * d2 * total


# ---- potentials and energies ------------------------------------------------

def log_potential(nu: RadialMeasure, s: float) -> float:
    """U_nu(s) = int log|z - w| d nu(w) evaluated at |z| = s, closed form."""
    if s < 0:
        raise ValueError("s must be >= 0")
    u = 0.0
    for t, m in nu.atoms:
        r = max(t, s)
        u += m * (np.log(r) if r > 0 else -np.inf)
    for a, b, c in nu.annuli:
        u += c * _int_2u_logmax(a, b, s)
    return u


def log_energy(nu: RadialMeasure) -> float:
    """Sigma(nu) = int U_nu d nu from pairwise closed forms.

    A circle atom's self-energy is mass^2 log(radius), which is finite;
    an atom at radius 0 is rejected.
    """
    comps = nu._components()
    total = 0.0
    for i, ci in enumerate(comps):
        total += _pair_energy(ci, ci)
        for cj in comps[i + 1:]:
            total += 2.0 * _pair_energy(ci, cj)
    return total


def cross_energy(nu: RadialMeasure, mu: RadialMeasure) -> float:
    """int U_nu d mu (= int U_mu d nu) from pairwise closed forms."""
    return sum(_pair_energy(ci, cj)
               for ci in nu._components() for cj in mu._components())


def signed_energy_diff(nu: RadialMeasure, mu: RadialMeasure) -> float:
    """Sigma(nu - mu) = Sigma(nu) - 2 int U_nu d mu + Sigma(mu), never by subtractive quadrature."""
    return log_energy(nu) - 2.0 * cross_energy(nu, mu) + log_energy(mu)


def b_alpha(nu: RadialMeasure, alpha: float):
    """(2 max_{s in [0, sqrt(alpha)]} (U_nu(s) - s^2/(2 alpha)), argmax radius).

    The objective is smooth between the measure's radii, so each segment is
    maximized by a bounded scalar search and compared with the breakpoints;
    ties resolve toward the smaller radius.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    smax = np.sqrt(alpha)

    def h(s):
        return log_potential(nu, s) - s * s / (2.0 * alpha)

    cuts = {0.0, smax}
    cuts.update(t for t, _ in nu.atoms if t < smax)
    for a, b, _ in nu.annuli:
        cuts.update(x for x in (a, b) if x < smax)
    cuts = sorted(cuts)
    best_v, best_s = -np.inf, 0.0
    for s in cuts:
        v = h(s)
        if v > best_v + 1e-15 or (abs(v - best_v) <= 1e-15 and s < best_s):
            best_v, best_s = v, s
    for lo, hi in zip(cuts, cuts[1:]):
        if hi - lo < 1e-13:
            continue
        res = minimize_scalar(lambda s: -h(s), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13})
        v = -res.fun
        if v > best_v + 1e-12:
            best_v, best_s = v, float(res.x)
    return 2.0 * best_v, best_s


@dataclass(frozen=True)
class FunctionalReport:
    U_at: dict
    energy: float
    B_alpha: float
    I_alpha: float
    J_alpha: float
    J_alpha_half: float
    argmax_w: float
    method: str  # closed_form | quadrature


def functional_I(nu: RadialMeasure, alpha: float) -> FunctionalReport:
    """I_alpha(nu) = B_alpha(nu) - Sigma(nu) with supporting values."""
    if abs(nu.total_mass - 1.0) > 1e-12:
        raise ValueError("functional_I expects a probability measure")
    sig = log_energy(nu)
    B, w = b_alpha(nu, alpha)
    m2 = nu.second_moment()
    return FunctionalReport(
        U_at={s: log_potential(nu, s) for s in (0.0, 1.0, float(np.sqrt(alpha)))},
        energy=sig,
        B_alpha=B,
        I_alpha=B - sig,
        J_alpha=m2 / alpha - sig,
        J_alpha_half=m2 / (2.0 * alpha) - sig,
        argmax_w=w,
        method="closed_form" if nu.label else "quadrature",
    )


def functional_J(nu: RadialMeasure, alpha: float) -> float:
    """Weighted energy int |w|^2/alpha d nu - Sigma(nu) (the 1/alpha convention)."""
    return nu.second_moment() / alpha - log_energy(nu)


def functional_J_half(nu: RadialMeasure, alpha: float) -> float:
    """Same with the 1/(2 alpha) weight used inside B_alpha."""
    return nu.second_moment() / (2.0 * alpha) - log_energy(nu)


def jensen_check(nu: RadialMeasure, r: float):
    """(U_nu(r) - U_nu(0), int_0^r nu(disk_t)/t dt) computed independently."""
    if r <= 0:
        raise ValueError("r must be positive")
    if any(t == 0.0 for t, _ in nu.atoms):
        raise InfiniteEnergy("atom at radius 0 breaks U(0)")
    lhs = log_potential(nu, r) - log_potential(nu, 0.0)
    rhs = 0.0
    for t, m in nu.atoms:
        if t < r:
            rhs += m * np.log(r / t)
    for a, b, c in nu.annuli:
        if r > a:
            mid = min(b, r)
            rhs += c * ((mid * mid - a * a) / 2.0
                        - a * a * (np.log(mid) - np.log(a) if a > 0 else 0.0))
            if a == 0.0:
                rhs += 0.0  # a^2 log term vanishes
            if r > b:
                rhs += c * (b * b - a * a) * np.log(r / b)
    return lhs, rhs


# ---- test functions and the Dirichlet-energy comparison --------------------

def dirichlet_energy(values: np.ndarray, h: float) -> float:
    """int (phi_x^2 + phi_y^2) dm by central differences + trapezoid.

    values samples phi on a uniform grid with spacing h covering the support;
    nonzero boundary values mean the support was truncated and are rejected.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or min(v.shape) < 3:
        raise ValueError("need a 2-D grid of at least 3x3 values")
    edge = max(np.max(np.abs(v[0])), np.max(np.abs(v[-1])),
               np.max(np.abs(v[:, 0])), np.max(np.abs(v[:, -1])))
    if edge > 0:
        raise ValueError("phi nonzero on the grid boundary: enlarge the grid")
    gx, gy = np.gradient(v, h)
    integrand = gx * gx + gy * gy
    return float(np.trapezoid(np.trapezoid(integrand, dx=h), dx=h))


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


@dataclass(frozen=True)
class RadialBump:
    """C^2 radial plateau bump: 1 on [lo+ramp, hi-ramp], 0 outside (lo, hi).

    lo may be 0, in which case the plateau starts at the origin.
    """

    lo: float
    hi: float
    ramp: float

    def __post_init__(self):
        if not (0 <= self.lo < self.hi) or self.ramp <= 0:
            raise ValueError("need 0 <= lo < hi and ramp > 0")
        width = self.hi - self.lo if self.lo > 0 else self.hi
        if 2 * self.ramp > width + 1e-15:
            raise ValueError("ramp too wide for the bump")

    def radial(self, s):
        s = np.asarray(s, dtype=float)
        up = _smoothstep((s - self.lo) / self.ramp) if self.lo > 0 else np.ones_like(s)
        down = _smoothstep((self.hi - s) / self.ramp)
        return up * down

    def __call__(self, w):
        return self.radial(np.abs(w))

    @property
    def lipschitz(self) -> float:
        return 1.875 / self.ramp  # max slope of the quintic smoothstep / ramp

    def as_grid(self, h: float):
        ext = self.hi + 2.0 * h
        x = np.arange(-ext, ext + h / 2, h)
        xx, yy = np.meshgrid(x, x)
        return self.radial(np.hypot(xx, yy)), h

    def integral(self, nu: RadialMeasure) -> float:
        """int phi d nu using closed-form masses and Gauss quadrature on the ramps."""
        from scipy.integrate import quad
        total = sum(m * float(self.radial(t)) for t, m in nu.atoms)
        for a, b, c in nu.annuli:
            lo, hi = max(a, self.lo if self.lo > 0 else 0.0), min(b, self.hi)
            if lo < hi:
                val, _ = quad(lambda u: 2.0 * u * float(self.radial(u)), lo, hi,
                              limit=200, epsabs=1e-13, epsrel=1e-12)
                total += c * val
        return total


def lin_stats_gap_bound(nu: RadialMeasure, mu: RadialMeasure, bump: RadialBump,
                        grid_h: float = 1.0 / 32.0):
    """(|int phi d nu - int phi d mu|, sqrt(D(phi)/(2 pi)) sqrt(-Sigma(nu - mu))).

    The signed energy of a difference of probability measures is <= 0 with
    equality iff the measures coincide; a positive value is an error.
    """
    lhs = abs(bump.integral(nu) - bump.integral(mu))
    sd = signed_energy_diff(nu, mu)
    if sd > 1e-12:
        raise NegativityViolation(f"Sigma(nu - mu) = {sd} > 0")
    D = dirichlet_energy(*bump.as_grid(grid_h))
    rhs = np.sqrt(D / (2.0 * np.pi)) * np.sqrt(max(-sd, 0.0))
    return lhs, rhs


# ---- the minimizer catalog ---------------------------------------------------

def equilibrium(alpha: float) -> RadialMeasure:
    """Uniform probability measure on the disk of radius sqrt(alpha)."""
    return RadialMeasure(annuli=((0.0, np.sqrt(alpha), 1.0 / alpha),),
                         probability=True, label="equilibrium")


def catalog(p: float, alpha: float, which: str = "gef_constrained") -> RadialMeasure:
    """Closed-form minimizing measure for disk-count ratio p at degree ratio alpha.

    which selects the normalized GEF minimizer on the disk of radius
    sqrt(alpha) ("gef_constrained"), its non-normalized global limit
    truncated at sqrt(alpha) ("gef_global_radon", total mass alpha), or the
    Ginibre analogue ("ginibre").
    """
    if p < 0 or p == 1.0:
        raise ValueError("need p >= 0 and p != 1")
    q = q_of_p(p)
    if not alpha > max(p, q, E):
        raise ValueError("alpha must exceed max(p, q(p), e)")
    sa = float(np.sqrt(alpha))
    if which == "ginibre":
        if p < 1.0:
            ann = ([(0.0, np.sqrt(p), 1.0)] if p > 0 else []) + [(1.0, sa, 1.0)]
            atom_mass = 1.0 - p
        else:
            ann = [(0.0, 1.0, 1.0), (np.sqrt(p), sa, 1.0)]
            atom_mass = p - 1.0
        scale = 1.0 / alpha
        return RadialMeasure(
            atoms=((1.0, atom_mass * scale),) if atom_mass > 0 else (),
            annuli=tuple((a, b, c * scale) for a, b, c in ann),
            probability=True, label=f"ginibre p={p}",
        )
    if which not in ("gef_constrained", "gef_global_radon"):
        raise ValueError(f"unknown catalog family {which!r}")
    if p < 1.0:
        ann = ([(0.0, np.sqrt(p), 1.0)] if p > 0 else []) + [(np.sqrt(q), sa, 1.0)]
        atom_mass = q - p
    elif p < E:
        ann = [(0.0, np.sqrt(q), 1.0), (np.sqrt(p), sa, 1.0)]
        atom_mass = p - q
    else:
        ann = [(np.sqrt(p), sa, 1.0)]
        atom_mass = p
    scale = 1.0 / alpha if which == "gef_constrained" else 1.0
    return RadialMeasure(
        atoms=((1.0, atom_mass * scale),) if atom_mass > 0 else (),
        annuli=tuple((a, b, c * scale) for a, b, c in ann),
        probability=(which == "gef_constrained"),
        label=f"{which} p={p}",
    )


def catalog_I(p: float, alpha: float) -> float:
    """Closed-form minimum value: I = log(alpha)/2 - 3/4 + Z_p / alpha^2."""
    return np.log(alpha) / 2.0 - 0.75 + z_const(p) / alpha**2
