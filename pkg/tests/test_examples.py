"""Worked examples for each operation, with oracle values computed independently."""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from deadcore import (
    Branch,
    GridField,
    LatticeDomain,
    PotentialSpec,
    RadialGrid,
    RadialPotential,
    brute_force_dp_oracle,
    comparison_pair,
    cosh_profile_n1,
    critical_radius,
    dead_core_report,
    discrete_energy,
    first_integral_profile_n1,
    grid_energy,
    log_core_profile,
    minimize_field,
    modulus_field,
    remark1_profile,
    solve_dp,
    solve_profile,
)
from deadcore.diagnostics import (
    Verdict,
    hamiltonian_check,
    maximum_principle_check,
    monotonicity_scan,
    pohozaev_scan,
    verify_comparison,
)
from deadcore.field import constant_data, edge_data, hedgehog_data
from deadcore.oracles import log_core_edge
from deadcore.radial import make_profile, refine_local
from deadcore.potential import Variant, compute_iq

R0 = math.sqrt(2.0 * math.e)
CHAR = RadialPotential.characteristic()


def const_profile(p, n, R, N):
    grid = RadialGrid.uniform(n, R, N)
    return make_profile(grid, np.full(N + 1, p.q), p)


def linf(prof, oracle):
    return float(np.max(np.abs(prof.values - oracle(prof.grid.radii))))


class TestDiscreteEnergy:
    @pytest.mark.parametrize("n", [1, 2])
    def test_constant_profile(self, n):
        assert discrete_energy(const_profile(CHAR, n, 1.0, 50), CHAR) == pytest.approx(1.0 / n, rel=1e-12)

    @pytest.mark.parametrize("N", [50, 100, 200])
    def test_constant_profile_three_dimensions(self, N):
        # midpoint weights integrate r^2 with defect sum(dr^3)/12 = dr^2/12
        e = discrete_energy(const_profile(CHAR, 3, 1.0, N), CHAR)
        assert e == pytest.approx(1.0 / 3.0 - 1.0 / (12.0 * N * N), rel=1e-12)

    def test_zero_potential(self):
        z = RadialPotential.zero()
        assert discrete_energy(const_profile(z, 2, 3.0, 40), z) == 0.0

    def test_closed_form_energy_midpoint_rule(self):
        R = 2 * R0
        cf = remark1_profile(1.0, R)
        ell = R / math.sqrt(math.e)
        # quadrature of the closed form, split at the core edge
        dens = lambda r: r * (0.5 * cf.derivative(r) ** 2 + (1.0 if cf(r) > 0 else 0.0))
        exact = quad(dens, ell, R, epsabs=1e-13, epsrel=1e-13)[0]
        assert exact == pytest.approx(1.0 + 4.0 * (math.e - 1.0), rel=1e-12)
        prof = cf.as_profile(RadialGrid.uniform(2, R, 2000), CHAR)
        assert discrete_energy(prof, CHAR, rule="midpoint") == pytest.approx(exact, rel=1e-4)

    def test_two_minimizers_share_energy(self):
        grid = RadialGrid.uniform(2, R0, 4000)
        e_up = discrete_energy(remark1_profile(1.0, R0, Branch.UPPER).as_profile(grid, CHAR), CHAR, rule="midpoint")
        e_lo = discrete_energy(remark1_profile(1.0, R0, Branch.LOWER).as_profile(grid, CHAR), CHAR, rule="midpoint")
        assert e_up == pytest.approx(e_lo, rel=1e-5)


class TestSolveProfile:
    def test_zero_potential(self):
        z = RadialPotential.zero()
        prof = solve_profile(z, 2, 3.0, 1.0, 100, 20)
        assert np.all(prof.values == 1.0) and prof.energy == 0.0

    def test_below_critical_radius(self):
        prof = solve_profile(CHAR, 2, 0.5 * R0, 1.0, 400, 100)
        assert np.all(prof.values == 1.0)


class TestRefineLocal:
    def test_optimal_profile_unchanged(self):
        z = RadialPotential.zero()
        prof = const_profile(z, 2, 2.0, 50)
        assert np.array_equal(refine_local(prof, z).values, prof.values)

    def test_energy_descent(self):
        p = RadialPotential.power_law(1.0)
        prof = solve_dp(p, 1, 4.0, 1.0, 200, 40)
        assert refine_local(prof, p, passes=10).energy <= prof.energy

    def test_distance_to_oracle_does_not_grow(self):
        R = 2 * R0
        prof = solve_dp(CHAR, 2, R, 1.0, 400, 100)
        oracle = log_core_profile(1.0, R)
        assert linf(refine_local(prof, CHAR, passes=10), oracle) <= linf(prof, oracle) + 1e-12


class TestComparisonPair:
    def test_zero_potential(self):
        pair = comparison_pair(RadialPotential.zero(), 2, 2.0, 100, 20)
        assert np.all(pair.upper.values == 1.0) and np.all(pair.lower.values == 1.0)

    def test_two_minimizers_at_critical_radius(self):
        # the discrete critical radius sits slightly below R0, so the
        # perturbation must exceed that shift for the upper branch to stay at q
        pair = comparison_pair(CHAR, 2, R0, 2000, 400, eps=5e-3)
        assert np.max(np.abs(pair.upper.values - 1.0)) <= 0.03
        assert linf(pair.lower, remark1_profile(1.0, R0, Branch.LOWER)) <= 0.03

    def test_log_core_at_twice_critical_radius(self):
        R = 2 * R0
        pair = comparison_pair(CHAR, 2, R, 2000, 400)
        oracle = log_core_profile(1.0, R)
        assert linf(pair.upper, oracle) <= 0.02 and linf(pair.lower, oracle) <= 0.02
        assert dead_core_report(pair, CHAR).core_radius == pytest.approx(log_core_edge(1.0, R), abs=0.02)

    def test_cosh(self):
        pair = comparison_pair(RadialPotential.power_law(2.0), 1, 1.0, 1000, 200)
        oracle = cosh_profile_n1(1.0, 1.0)
        assert linf(pair.upper, oracle) < 1e-3 and linf(pair.lower, oracle) < 1e-3


class TestDeadCoreReport:
    @pytest.mark.parametrize("R", [1.0, 5.0, 10.0])
    def test_divergent_iq(self, R):
        p = RadialPotential.power_law(2.0)
        rep = dead_core_report(comparison_pair(p, 1, R, 1000, 100), p)
        assert not rep.has_dead_core and rep.core_radius == 0.0 and math.isinf(rep.iq.value)

    def test_core_bound_n1(self):
        p = RadialPotential.power_law(1.0)
        R = (4 + math.sqrt(2.0)) * 2
        rep = dead_core_report(comparison_pair(p, 1, R, 1000, 200), p)
        iq2 = compute_iq(p, Variant.SQRT_2W).value
        assert rep.core_radius >= R - math.sqrt(2.0) * iq2 - 0.05


def test_critical_radius_power_law_n1():
    cr = critical_radius(RadialPotential.power_law(1.0), 1, N=800, M=200)
    assert float(cr) == pytest.approx(math.sqrt(2.0), rel=0.02)


class TestOracles:
    def test_remark1_values(self):
        assert remark1_profile(1.0, R0, Branch.UPPER)(0.5) == 1.0
        assert remark1_profile(1.0, R0, Branch.LOWER)(math.sqrt(2.0)) == pytest.approx(0.0, abs=1e-15)
        for b in Branch:
            assert remark1_profile(1.0, 2 * R0, b)(2 * R0) == 1.0

    def test_first_integral(self):
        l = 3.0 - math.sqrt(2.0)
        beta = first_integral_profile_n1(RadialPotential.power_law(1.0), R=3.0)
        r = np.linspace(l, 3.0, 9)
        assert beta(r) == pytest.approx((r - l) ** 2 / 2, abs=1e-13)
        assert beta(3.0) == 1.0
        char = first_integral_profile_n1(CHAR, R=2.0)
        l2 = 2.0 - 1 / math.sqrt(2.0)
        r = np.linspace(l2 + 0.01, 2.0, 9)
        assert char(r) == pytest.approx((r - l2) * math.sqrt(2.0), abs=1e-13)
        assert char(l2) == pytest.approx(0.0, abs=1e-15)

    def test_cosh(self):
        c = cosh_profile_n1(1.0, 1.0)
        assert c(1.0) == 1.0
        assert c(0.0) == pytest.approx(1.0 / math.cosh(math.sqrt(2.0)), rel=1e-14)
        assert c(0.0) == pytest.approx(0.459098131085425499, rel=1e-14)

    @pytest.mark.parametrize("p,n", [(CHAR, 2), (RadialPotential.power_law(1.0), 1)])
    def test_brute_force_matches_dp(self, p, n):
        bf = brute_force_dp_oracle(p, n, 1.0, 1.0, 16, 8)
        dp = solve_dp(p, n, 1.0, 1.0, 16, 8)
        assert bf.energy == dp.energy

    def test_brute_force_zero_potential(self):
        bf = brute_force_dp_oracle(RadialPotential.zero(), 2, 1.0, 1.0, 10, 6)
        assert np.all(bf.values == 1.0)


class TestField:
    def test_energy_of_zero(self):
        d = LatticeDomain.rectangle((7, 9), 0.25)
        f = GridField.from_boundary(d, 2, 1.0, constant_data([0.0, 0.0]))
        assert grid_energy(f, PotentialSpec.ray_linear(CHAR, 2)) == 0.0

    def test_energy_of_constant(self):
        p = RadialPotential.power_law(2.0)
        d = LatticeDomain.rectangle((11, 6), 0.2)
        c = [0.3, 0.4]
        f = GridField.from_boundary(d, 2, 1.0, constant_data(c), fill=c)
        volume = (10 * 0.2) * (5 * 0.2)
        assert grid_energy(f, PotentialSpec(p, m=2)) == pytest.approx(volume * 0.25, rel=1e-12)

    def test_energy_of_linear(self):
        R, q = 2.0, 0.8
        d = LatticeDomain.interval(0.0, R, 41)
        x = d.coords()[:, 0]
        f = GridField.from_boundary(d, 1, q, edge_data(d, [0.0], [q]), fill=(q * x / R)[d.interior][:, None])
        assert grid_energy(f, PotentialSpec(RadialPotential.zero(q))) == pytest.approx(0.5 * q * q / R, rel=1e-12)

    def test_zero_data_minimizer(self):
        d = LatticeDomain.disk(2.0, 21)
        f0 = GridField.from_boundary(d, 2, 1.0, constant_data([0.0, 0.0]), fill=[0.3, -0.2])
        f, stats = minimize_field(f0, PotentialSpec(CHAR, m=2), init="given")
        assert stats.converged and np.max(np.abs(f.values)) <= 1e-9

    def test_cosh_reflected(self):
        R = 1.0
        d = LatticeDomain.interval(-R, R, 801)
        f, _ = minimize_field(GridField.from_boundary(d, 1, 1.0, constant_data([1.0])),
                              PotentialSpec(RadialPotential.power_law(2.0)))
        exact = cosh_profile_n1(1.0, R)(np.abs(d.coords()[:, 0]))
        assert np.max(np.abs(f.values[:, 0] - exact)) <= 0.01

    def test_hedgehog_core(self):
        # the core edge solves l*ln(R/l) = q/sqrt2, not l = R/sqrt(e)
        R = 2 * R0
        d = LatticeDomain.disk(R, 201)
        f0 = GridField.from_boundary(d, 2, 1.0, hedgehog_data(1.0))
        f, stats = minimize_field(f0, PotentialSpec(CHAR, m=2))
        dist = np.linalg.norm(d.coords(), axis=-1)
        live = d.interior & (modulus_field(f) > 1e-3)
        core = float(dist[live].min())
        assert stats.converged
        assert core == pytest.approx(log_core_edge(1.0, R), abs=0.05)

    def test_modulus(self):
        d = LatticeDomain.rectangle((5, 5), 0.5)
        u = np.array([0.6, 0.8]) * 0.7
        f = GridField.from_boundary(d, 2, 0.7, constant_data(u), fill=u)
        assert modulus_field(f)[d.active] == pytest.approx(0.7, rel=1e-14)
        z = GridField.from_boundary(d, 2, 0.7, constant_data([0.0, 0.0]))
        assert np.all(modulus_field(z) == 0.0)


def sampled_cosh_field(q, R, K):
    d = LatticeDomain.interval(-R, R, K)
    x = d.coords()[:, 0]
    vals = cosh_profile_n1(q, R)(np.abs(x))
    return GridField.from_boundary(d, 1, q, constant_data([q]), fill=vals[d.interior][:, None])


class TestDiagnostics:
    def test_comparison_zero_field(self):
        d = LatticeDomain.interval(-3.0, 3.0, 61)
        f = GridField.from_boundary(d, 1, 1.0, constant_data([0.0]))
        pair = comparison_pair(CHAR, 1, 2.0, 200, 40)
        v = verify_comparison(f, pair, [0.0], 2.0)
        assert v.max_violation <= 0.0 and v.verdict == Verdict.PASS

    def test_comparison_cosh_field(self):
        f = sampled_cosh_field(1.0, 1.0, 401)
        pair = comparison_pair(RadialPotential.power_law(2.0), 1, 1.0, 800, 200)
        assert verify_comparison(f, pair, [0.0], 1.0, tol=0.01).max_violation <= 0.01

    def test_pohozaev_zero_field(self):
        d = LatticeDomain.disk(2.0, 41)
        f = GridField.from_boundary(d, 2, 1.0, constant_data([0.0, 0.0]))
        for rec in pohozaev_scan(f, PotentialSpec(CHAR, m=2), [0.5, 1.0, 1.5]):
            assert rec.lhs == 0.0 and rec.rhs == 0.0

    def test_pohozaev_first_integral(self):
        p = RadialPotential.power_law(1.0)
        beta = first_integral_profile_n1(p, R=3.0)
        for rec in pohozaev_scan(beta, p, np.linspace(0.2, 3.0, 15)):
            assert rec.residual <= 1e-8

    def test_monotonicity_constant(self):
        prof = const_profile(CHAR, 2, 3.0, 300)
        scan = monotonicity_scan(prof, CHAR, np.linspace(0.3, 3.0, 10))
        vals = [v for _, v in scan.records]
        assert scan.verdict == Verdict.PASS and all(b > a for a, b in zip(vals, vals[1:]))

    def test_monotonicity_cosh(self):
        scan = monotonicity_scan(cosh_profile_n1(1.0, 1.0), RadialPotential.power_law(2.0), np.linspace(0.1, 1.0, 10))
        vals = [v for _, v in scan.records]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_hamiltonian_first_integral(self):
        p = RadialPotential.power_law(1.0)
        grid = RadialGrid.uniform(1, 3.0, 3000)
        prof = first_integral_profile_n1(p, R=3.0).as_profile(grid, p)
        rec = hamiltonian_check(prof, p, ztol=0.0, rule="midpoint")
        assert rec.max_deviation <= 1e-6 and abs(rec.mean) <= 1e-6

    def test_hamiltonian_cosh(self):
        p = RadialPotential.power_law(2.0)
        c = cosh_profile_n1(1.0, 1.0)
        prof = c.as_profile(RadialGrid.uniform(1, 1.0, 1000), p)
        rec = hamiltonian_check(prof, p, rule="trapezoid")
        assert rec.max_deviation <= 1e-4
        assert rec.mean == pytest.approx(-c(0.0) ** 2, abs=1e-4)

    def test_hamiltonian_constant(self):
        z = RadialPotential.zero()
        rec = hamiltonian_check(const_profile(z, 1, 2.0, 100), z)
        assert rec.max_abs == 0.0

    def test_maximum_principle_cosh(self):
        f = sampled_cosh_field(1.0, 1.0, 201)
        res = maximum_principle_check(f, PotentialSpec(RadialPotential.power_law(2.0)))
        assert res.verdict == Verdict.PASS
        assert res.min_value == pytest.approx(1.0 / math.cosh(math.sqrt(2.0)), rel=1e-12)
