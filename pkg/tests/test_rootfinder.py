import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gefzeros.rootfinder import (DegenerateLeadingCoefficient, ResampleNeeded,
                                 ZeroConfig, argument_principle_count,
                                 coeffs_from_roots, count_in_disk,
                                 from_ndjson_record, linear_statistics,
                                 perturbation_match, roots, to_ndjson_record)
from gefzeros import rootfinder as rf

TF = rf.TestFunction  # aliased so pytest does not try to collect it
from gefzeros.series_core import CoeffVector, sample_coeffs


def hausdorff(a, b):
    a = np.asarray(a)[:, None]
    b = np.asarray(b)[None, :]
    d = np.abs(a - b)
    return max(d.min(axis=1).max(), d.min(axis=0).max())


class TestRoots:
    def test_linear(self):
        # xi_0 + xi_1 L z = 0  =>  z = -xi_0 / (xi_1 L)
        c = CoeffVector([2.0 + 1.0j, 3.0 - 0.5j], scale=2.0)
        z = roots(c).zeros
        assert z.size == 1
        assert z[0] == pytest.approx(-(2.0 + 1.0j) / ((3.0 - 0.5j) * 2.0), abs=1e-13)

    def test_construct_then_solve(self):
        target = np.array([0.5, -0.3 + 0.2j, 1.1j])
        c = coeffs_from_roots(target, L=1.0)
        got = roots(c).zeros
        assert hausdorff(got, target) < 1e-10

    def test_construct_then_solve_scaled(self):
        rng = np.random.default_rng(0)
        target = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        c = coeffs_from_roots(target, L=3.0)
        assert hausdorff(roots(c).zeros, target) < 1e-8

    def test_vieta_sum_identity(self):
        # sum of roots of sum xi_k (Lz)^k/sqrt(k!) is -xi_{N-1} sqrt(N)/(xi_N L)
        rng = np.random.default_rng(1)
        c = sample_coeffs(64, rng)
        z = roots(c).zeros
        N = 64
        expected = -c.coeffs[N - 1] / c.coeffs[N] * np.sqrt(N) / c.scale
        assert np.sum(z) == pytest.approx(expected, rel=1e-8)

    def test_residuals_small(self):
        from gefzeros.series_core import eval_poly_many
        rng = np.random.default_rng(2)
        c = sample_coeffs(40, rng)
        z = roots(c).zeros
        la0, _ = eval_poly_many(c, z)
        la1, _ = eval_poly_many(c, z, deriv=1)
        # |P/P'| < 1e-12 max(1, |z|) after polishing
        assert np.all(np.exp(la0 - la1) < 1e-12 * np.maximum(1.0, np.abs(z)))

    def test_aberth_path_large_degree(self):
        # round-tripping 600 random roots through the coefficient vector is
        # hopelessly ill-conditioned, so the large-degree path is checked on
        # a two-term polynomial 1 + (Lz)^n/sqrt(n!) whose roots sit exactly
        # on the circle |z| = (n!)^(1/2n)/L at odd multiples of pi/n
        n = 600
        xi = np.zeros(n + 1, dtype=complex)
        xi[0] = 1.0
        xi[n] = 1.0
        from scipy.special import gammaln
        R = np.exp(gammaln(n + 1) / (2.0 * n))
        target = R * np.exp(1j * (2 * np.arange(n) + 1) * np.pi / n)
        got = roots(CoeffVector(xi, scale=1.0)).zeros
        assert hausdorff(got, target) < 1e-8 * R

    def test_degenerate_leading(self):
        with pytest.raises(DegenerateLeadingCoefficient):
            roots(CoeffVector([1.0, 1.0, 0.0]))

    def test_multiset_complete(self):
        c = sample_coeffs(32, np.random.default_rng(4))
        assert roots(c).zeros.size == 32


class TestCounts:
    def test_trivial_counts(self):
        zc = ZeroConfig(np.array([0.5 + 0j, 2.0 + 0j, -3.0 + 1j]))
        assert count_in_disk(zc, 0.0) == 0
        assert count_in_disk(zc, 1e30) == 3
        assert count_in_disk(zc, 1.0) == 1

    def test_count_boundary_closed(self):
        zc = ZeroConfig(np.array([1.0 + 0j]))
        assert count_in_disk(zc, 1.0) == 1

    def test_argument_principle_monomial(self):
        # P(z) = z^N has N zeros at the origin
        N = 7
        coeffs = np.zeros(N + 1, dtype=complex)
        coeffs[N] = 1.0
        assert argument_principle_count(CoeffVector(coeffs), 1.0) == N

    def test_argument_principle_two_roots(self):
        c = coeffs_from_roots(np.array([0.5, 2.0]), L=1.0)
        assert argument_principle_count(c, 1.0) == 1

    def test_cross_validation_sweep(self):
        rng = np.random.default_rng(5)
        agree = total = 0
        for _ in range(200):
            c = sample_coeffs(32, rng)
            zc = roots(c)
            if np.min(np.abs(np.abs(zc.zeros) - 1.0)) < 1e-6:
                continue
            total += 1
            agree += argument_principle_count(c, 1.0) == count_in_disk(zc, 1.0)
        assert total > 150 and agree == total

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_count_monotone_in_rho(self, seed):
        rng = np.random.default_rng(seed)
        zc = roots(sample_coeffs(16, rng))
        rhos = np.linspace(0.0, 6.0, 25)
        counts = [count_in_disk(zc, r) for r in rhos]
        assert all(a <= b for a, b in zip(counts, counts[1:]))


def bump(support_radius=1.0, lip=2.0):
    def f(w):
        s = abs(w) / support_radius
        return max(0.0, 1.0 - s * s) ** 2

    return TF(func=f, support_radius=support_radius, lipschitz=lip)


class TestLinearStatistics:
    def test_zero_function(self):
        zc = ZeroConfig(np.array([1.0 + 0j, 2.0 + 0j]))
        phi = TF(func=lambda w: 0.0, support_radius=1.0, lipschitz=1.0)
        assert linear_statistics(zc, phi, 1.0) == 0.0

    def test_additivity_disjoint_supports(self):
        rng = np.random.default_rng(6)
        zc = roots(sample_coeffs(24, rng))
        inner = TF(lambda w: 1.0 if abs(w) < 0.5 else 0.0, 0.5, 1e9)
        outer = TF(lambda w: 1.0 if 0.5 <= abs(w) < 1.5 else 0.0, 1.5, 1e9)
        both = TF(lambda w: inner(w) + outer(w), 1.5, 1e9)
        r = 2.0
        assert linear_statistics(zc, both, r) == pytest.approx(
            linear_statistics(zc, inner, r) + linear_statistics(zc, outer, r))

    def test_expected_value_unconditional(self):
        # E sum phi(z/r) = (r^2/pi) int phi dm for the full GEF; truncation at
        # N well beyond r^2 makes the truncation bias negligible at r=3
        r = 3.0
        N = int(4 * r * r + 40)
        phi = bump(support_radius=1.0)
        # int phi dm = 2 pi int_0^1 (1-s^2)^2 s ds = pi/3
        target = r * r / np.pi * (np.pi / 3.0)
        rng = np.random.default_rng(7)
        tot = 0.0
        n_mc = 3000
        for _ in range(n_mc):
            zc = roots(sample_coeffs(N, rng))
            tot += linear_statistics(zc, phi, r)
        assert tot / n_mc == pytest.approx(target, rel=0.02)


class TestPerturbationMatch:
    def test_zero_perturbation(self):
        zc = ZeroConfig(np.array([1.0 + 0j, -0.5 + 0j]))
        phi = bump()
        lhs, rhs = perturbation_match(zc, zc, M=2, gamma=1e-4, phi=phi, r=1.0)
        assert lhs == 0.0 and rhs > 0.0

    def test_budget_formula(self):
        zc = ZeroConfig(np.array([1.0 + 0j]))
        phi = bump(lip=3.0)
        _, rhs = perturbation_match(zc, zc, M=4, gamma=0.01, phi=phi, r=2.0)
        assert rhs == pytest.approx(4 * 3.0 * (2 * 4 * 0.01 / 2.0))

    def test_truncation_cross_check(self):
        # adding 50 extra Gaussian terms beyond N=4r^2+40 leaves disk counts
        # unchanged in nearly all samples
        r = 4.0
        N = int(4 * r * r + 40)
        rng = np.random.default_rng(8)
        same = 0
        n_mc = 200
        done = 0
        while done < n_mc:
            c_big = sample_coeffs(N + 50, rng)
            c_small = CoeffVector(c_big.coeffs[: N + 1])
            try:
                z_b, z_s = roots(c_big), roots(c_small)
            except ResampleNeeded:
                continue
            done += 1
            same += all(count_in_disk(z_b, rho) == count_in_disk(z_s, rho)
                        for rho in (0.5 * r, r))
        assert same / n_mc >= 0.99


class TestSerialization:
    def test_roundtrip(self):
        rng = np.random.default_rng(9)
        zc = roots(sample_coeffs(8, rng))
        line = to_ndjson_record(zc, seed=42, N=8, L=1.0)
        back, rec = from_ndjson_record(line)
        assert rec["seed"] == 42 and rec["N"] == 8 and rec["L"] == 1.0
        assert np.allclose(back.zeros, zc.zeros)
