import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deadcore import (
    DomainError,
    GeometryError,
    GridField,
    LatticeDomain,
    PotentialSpec,
    PreconditionError,
    RadialPotential,
    Tie,
    comparison_pair,
    cosh_profile_n1,
    first_integral_profile_n1,
    log_core_profile,
    minimize_field,
    solve_profile,
)
from deadcore.diagnostics import (
    Check,
    Mode,
    Report,
    Verdict,
    comparison_tolerance,
    dead_core_check,
    dead_core_check_profile,
    hamiltonian_check,
    maximum_principle_check,
    monotonicity_scan,
    pohozaev_check,
    pohozaev_scan,
    scaling_check,
    verify_comparison,
)
from deadcore.field import constant_data, edge_data, hedgehog_data

from conftest import R0


@pytest.fixture(scope="module")
def char_pair():
    return comparison_pair(RadialPotential.characteristic(), 2, 2.5, 200, 50)


@pytest.fixture(scope="module")
def disk_field():
    dom = LatticeDomain.disk(3.0, 61)
    spec = PotentialSpec(RadialPotential.characteristic(), m=2)
    f0 = GridField.from_boundary(dom, 2, 1.0, hedgehog_data(1.0, zero_arc=(math.pi, 1.0, 0.3)))
    f, _ = minimize_field(f0, spec)
    return f


class TestComparison:
    def test_tolerance_formula(self):
        assert comparison_tolerance(0.01, 1.0, 200) == pytest.approx(3 * (0.01 + 0.005))

    def test_interior_pass(self, disk_field, char_pair):
        v = verify_comparison(disk_field, char_pair, (0.0, 0.0), 2.5)
        assert v.verdict == Verdict.PASS and v.nodes_checked > 0
        assert v.to_check().to_dict()["parameters"]["mode"] == "Interior"

    def test_ball_must_fit(self, disk_field, char_pair):
        with pytest.raises(GeometryError):
            verify_comparison(disk_field, char_pair, (1.0, 0.0), 2.5)

    def test_radius_must_match(self, disk_field, char_pair):
        with pytest.raises(DomainError):
            verify_comparison(disk_field, char_pair, (0.0, 0.0), 2.0)

    def test_boundary_mode_needs_zero_data(self, disk_field, char_pair):
        v = verify_comparison(disk_field, char_pair, (-3.0, 0.0), 2.5, Mode.BOUNDARY)
        assert v.verdict == Verdict.PASS
        with pytest.raises(PreconditionError):
            verify_comparison(disk_field, char_pair, (3.0, 0.0), 2.5, Mode.BOUNDARY)

    def test_violation_verdicts(self, char_pair):
        # a field that is q everywhere is not a minimiser and exceeds the envelope inside its core
        dom = LatticeDomain.disk(3.0, 41)
        f = GridField.from_boundary(dom, 2, 1.0, hedgehog_data(1.0))
        f = f.with_values(np.where(dom.active[..., None], [1.0, 0.0], 0.0))
        assert verify_comparison(f, char_pair, (0.0, 0.0), 2.5).verdict == Verdict.INCONCLUSIVE
        assert verify_comparison(f, char_pair, (0.0, 0.0), 2.5, certified=True).verdict == Verdict.FAIL


class TestPohozaev:
    @pytest.mark.parametrize("p", [RadialPotential.power_law(1.0), RadialPotential.power_law(0.5),
                                   RadialPotential.characteristic()])
    def test_first_integral_oracle(self, p):
        prof = first_integral_profile_n1(p, R=3.0)
        recs = pohozaev_scan(prof, p, np.linspace(0.03, 3.0, 25))
        assert max(r.residual for r in recs) <= 1e-8

    def test_log_core_closed_form(self):
        p = RadialPotential.characteristic()
        prof = log_core_profile(1.0, 2 * R0)
        ell = prof.params["core_edge"]
        recs = pohozaev_scan(prof, p, np.linspace(ell + 0.05, 2 * R0, 10))
        assert max(r.residual for r in recs) <= 1e-8

    def test_exclusion_only_for_jump_potentials(self):
        p = RadialPotential.quadratic()
        prof = solve_profile(p, 2, 3.0, 1.0, 200, 40)
        assert not any(r.excluded for r in pohozaev_scan(prof, p, [1.0, 2.0, 3.0]))
        c = RadialPotential.characteristic()
        prof = solve_profile(c, 2, 2 * R0, 1.0, 400, 80)
        edge = next(r for r, v in zip(prof.grid.radii, prof.values) if v > 0)
        rec = pohozaev_scan(prof, c, [edge])[0]
        assert rec.excluded

    def test_check_verdicts(self):
        p = RadialPotential.power_law(1.0)
        recs = pohozaev_scan(first_integral_profile_n1(p, R=3.0), p, [1.0, 2.0])
        assert pohozaev_check(recs, 1e-8).verdict == Verdict.PASS
        recs[0].residual = 1.0
        assert pohozaev_check(recs, 1e-8).verdict == Verdict.FAIL

    def test_radius_domain(self):
        p = RadialPotential.quadratic()
        prof = solve_profile(p, 2, 3.0, 1.0, 100, 20)
        with pytest.raises(DomainError):
            pohozaev_scan(prof, p, [3.5])


class TestMonotonicity:
    def test_closed_form_two_dimensions(self):
        p = RadialPotential.characteristic()
        scan = monotonicity_scan(log_core_profile(1.0, 2 * R0), p, np.linspace(0.5, 2 * R0, 12))
        assert scan.verdict == Verdict.PASS
        vals = [v for _, v in scan.records]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_profile(self):
        p = RadialPotential.power_law(1.0)
        prof = solve_profile(p, 2, 6.0, 1.0, 300, 60)
        assert monotonicity_scan(prof, p, np.linspace(0.5, 6.0, 12)).verdict == Verdict.PASS


class TestHamiltonian:
    def test_cosh_trapezoid(self):
        p = RadialPotential.power_law(2.0)
        prof = solve_profile(p, 1, 1.0, 1.0, 1000, 200)
        rec = hamiltonian_check(prof, p, rule="trapezoid")
        # H = 1/2 beta'^2 - beta^2 = -beta(0)^2
        assert rec.mean == pytest.approx(-cosh_profile_n1(1.0, 1.0)(0.0) ** 2, abs=1e-3)
        assert rec.max_deviation < 1e-3 and not rec.has_core

    def test_requires_one_dimension(self):
        p = RadialPotential.power_law(1.0)
        with pytest.raises(PreconditionError):
            hamiltonian_check(solve_profile(p, 2, 3.0, 1.0, 100, 20), p)

    def test_unknown_rule(self):
        p = RadialPotential.power_law(1.0)
        with pytest.raises(DomainError):
            hamiltonian_check(solve_profile(p, 1, 3.0, 1.0, 100, 20), p, rule="simpson")


class TestMaximumPrinciple:
    def test_passes_for_divergent_iq(self):
        dom = LatticeDomain.interval(-3.0, 3.0, 121)
        spec = PotentialSpec(RadialPotential.power_law(2.0))
        f, _ = minimize_field(GridField.from_boundary(dom, 1, 1.0, constant_data([0.5])), spec)
        res = maximum_principle_check(f, spec)
        vmin, verdict = res
        assert verdict == Verdict.PASS and vmin > 0.5 / math.cosh(math.sqrt(2) * 3.0) * 0.9

    def test_preconditions(self, disk_field):
        with pytest.raises(PreconditionError):
            maximum_principle_check(disk_field, PotentialSpec(RadialPotential.characteristic(), m=2))
        dom = LatticeDomain.interval(0.0, 1.0, 11)
        f = GridField.from_boundary(dom, 1, 1.0, constant_data([0.5]))
        with pytest.raises(PreconditionError):
            maximum_principle_check(f, RadialPotential.characteristic())
        with pytest.raises(PreconditionError):
            maximum_principle_check(f, PotentialSpec.ray_linear(RadialPotential.power_law(2.0), 1))
        g = GridField.from_boundary(dom, 1, 1.0, edge_data(dom, [0.0], [0.5]))
        with pytest.raises(PreconditionError):
            maximum_principle_check(g, RadialPotential.power_law(2.0))


class TestDeadCore:
    def test_vacuous_is_inconclusive(self, disk_field):
        chk = dead_core_check(disk_field, PotentialSpec(RadialPotential.characteristic(), m=2))
        assert chk.verdict == Verdict.INCONCLUSIVE

    def test_large_interval(self):
        dom = LatticeDomain.interval(-8.0, 8.0, 321)
        spec = PotentialSpec(RadialPotential.characteristic())
        f, _ = minimize_field(GridField.from_boundary(dom, 1, 1.0, constant_data([1.0])), spec)
        chk = dead_core_check(f, spec)
        assert chk.verdict == Verdict.PASS and chk.residuals["nodes_beyond"] > 0

    def test_profile_bound(self):
        p = RadialPotential.power_law(1.0)
        prof = solve_profile(p, 1, 6.0, 1.0, 400, 100)
        assert dead_core_check_profile(prof, p).verdict == Verdict.PASS


@given(st.sampled_from([0.5, 2.0]), st.floats(2.0, 6.0))
def test_scaling_identity(kappa, R):
    chk = scaling_check(RadialPotential.power_law(1.0), 2, R, 1.0, kappa, 64, 16, Tie.PREFER_LOW)
    assert chk.verdict == Verdict.PASS


def test_report_json():
    rep = Report(config={"b": 1, "a": math.inf})
    rep.add(Check("x", {"p": np.float64(1.5)}, {"r": -math.inf}, None, Verdict.PASS))
    doc = json.loads(rep.to_json())
    assert doc["config"] == {"a": None, "b": 1}
    assert doc["checks"][0] == {"check": "x", "parameters": {"p": 1.5}, "residuals": {"r": None},
                                "tolerance": None, "verdict": "pass"}
    assert rep.to_json().index('"checks"') < rep.to_json().index('"config"')
