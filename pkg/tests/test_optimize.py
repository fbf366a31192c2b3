import math

import numpy as np
import pytest

from cohortmix import (CurveObjective, DistributionSpec as Dist,
                       InfeasibleDesignError, UndefinedComparisonError, are,
                       optimize_curve, optimize_fixed_time,
                       optimize_fixed_time_two_group)
from conftest import make_design, random_design

PUBLISHED_SWEEP = {
    # theta: (pi_opt, ARE vs 0.5, ARE vs 1, ARE vs 0)
    1.0: (0.09, 1.56, math.inf, 1.59),
    2.5: (0.22, 1.22, math.inf, 2.37),
    5.0: (0.39, 1.03, math.inf, 3.61),
    10.0: (0.68, 1.04, 1.27, 4.56),
    15.0: (0.93, 1.12, 1.01, 5.46),
}


class TestCurveOptimum:
    @pytest.mark.parametrize("theta", [1.0, 5.0, 15.0])
    def test_published_active_window_sweep(self, theta):
        pi_pub, are05, are1, are0 = PUBLISHED_SWEEP[theta]
        result = optimize_curve(make_design(theta=theta))
        assert result.pi_opt == pytest.approx(pi_pub, abs=0.02)
        table = dict(result.are_table)
        assert table[0.5] == pytest.approx(are05, abs=0.05)
        if math.isinf(are1):
            assert math.isinf(table[1.0])
        else:
            assert table[1.0] == pytest.approx(are1, abs=0.05)

    def test_weighted_optima(self):
        for weight, pi_pub, gain in [(Dist.beta4(1, 4, 0, 10), 0.75, 1.10),
                                     (Dist.beta4(4, 1, 0, 10), 0.21, 1.18)]:
            result = optimize_curve(make_design(theta=5.0, weight=weight),
                                    comparison_pis=(0.5,))
            assert result.pi_opt == pytest.approx(pi_pub, abs=0.02)
            assert result.are_table[0][1] == pytest.approx(gain, abs=0.02)

    def test_monotone_in_active_window(self):
        pis = [optimize_curve(make_design(theta=th)).pi_opt
               for th in (1.0, 2.5, 5.0, 10.0, 15.0)]
        assert all(b >= a for a, b in zip(pis, pis[1:]))

    def test_optimality_against_grid(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            d = random_design(rng)
            ev = CurveObjective(d)
            result = optimize_curve(d, evaluator=ev)
            k_opt = result.objective_value / d.n
            for p in np.linspace(0.0, 1.0, 101):
                kp = ev.k(float(p))
                if math.isfinite(kp):
                    assert k_opt <= kp * (1 + 1e-9) + 1e-300

    def test_boundary_when_incident_dominates(self):
        # arrival essentially at tau: prevalent patients provide no risk mass
        d = make_design(theta=10.0, arrival=Dist.point_mass(9.99))
        result = optimize_curve(d)
        assert result.boundary == "all_incident"
        assert result.pi_opt == pytest.approx(1.0, abs=1e-6)

    def test_infeasible_design_raises(self):
        # incident censored at entry and prevalent risk confined to [1, 3]
        d = make_design(theta=2.0, arrival=Dist.point_mass(1.0),
                        incident_entry=Dist.point_mass(0.0))
        with pytest.raises(InfeasibleDesignError):
            optimize_curve(d)

    def test_interior_residual_small(self):
        result = optimize_curve(make_design(theta=5.0))
        assert result.boundary == "interior"
        assert abs(result.residual_at_opt) <= 1e-5 * result.objective_value / 1000


class TestFixedTime:
    def test_near_origin_prefers_incident(self, baseline):
        result = optimize_fixed_time(baseline, 0.05)
        assert result.boundary == "all_incident"

    def test_incident_dominating_design(self):
        d = make_design(theta=10.0, arrival=Dist.point_mass(9.99))
        result = optimize_fixed_time(d, 8.0)
        assert result.boundary == "all_incident"

    def test_tail_weighted_equals_curve_optimum(self, baseline):
        ev = CurveObjective(baseline)
        fixed = optimize_fixed_time(baseline, 10.0, weighted_by_tail=True, evaluator=ev)
        curve = optimize_curve(baseline, evaluator=ev)
        assert fixed.pi_opt == pytest.approx(curve.pi_opt, abs=5e-5)

    def test_two_group_shared(self, baseline):
        other = make_design(theta=7.5, survival=Dist.exponential(7.0))
        res = optimize_fixed_time_two_group(baseline, other, 5.0)
        assert 0.0 <= res.pi_opt <= 1.0
        sep = optimize_fixed_time_two_group(baseline, other, 5.0, shared=False)
        assert len(sep) == 2


class TestAre:
    def test_identity(self, baseline):
        assert are(baseline, 0.4, 0.4) == pytest.approx(1.0, rel=1e-12)

    def test_theta15_published_ratios(self):
        d = make_design(theta=15.0)
        ev = CurveObjective(d)
        result = optimize_curve(d, evaluator=ev)
        assert are(d, result.pi_opt, 1.0, evaluator=ev) == pytest.approx(1.01, abs=0.05)
        assert are(d, result.pi_opt, 0.0, evaluator=ev) == pytest.approx(5.46, abs=0.15)

    def test_optimum_at_least_one_vs_even_mix(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            d = random_design(rng)
            ev = CurveObjective(d)
            result = optimize_curve(d, evaluator=ev)
            assert are(d, result.pi_opt, 0.5, evaluator=ev) >= 1 - 1e-9

    def test_undefined_comparison(self):
        d = make_design(theta=2.0, arrival=Dist.point_mass(1.0),
                        incident_entry=Dist.point_mass(0.0))
        with pytest.raises(UndefinedComparisonError):
            are(d, 0.3, 0.7)

    def test_infinite_vs_finite(self):
        d = make_design(theta=5.0)
        assert math.isinf(are(d, 0.39, 1.0))
        assert are(d, 1.0, 0.39) == 0.0


class TestNecessaryCondition:
    def test_constant_sign_gap_forces_boundary(self):
        # incident patients censored at entry: their at-risk probability is
        # identically zero, the at-risk gap has constant sign, and no
        # interior optimum can exist
        d = make_design(incident_entry=Dist.point_mass(0.0))
        result = optimize_curve(d)
        assert result.boundary == "all_prevalent"
        assert result.pi_opt == 0.0


class TestFixedTimeOptimality:
    def test_minimum_beats_grid(self):
        rng = np.random.default_rng(909)
        for _ in range(5):
            d = random_design(rng)
            ev = CurveObjective(d)
            t = float(rng.uniform(2.0, d.tau))
            result = optimize_fixed_time(d, t, evaluator=ev)
            v_opt = result.objective_value / d.n
            for p in np.linspace(0.0, 1.0, 51):
                vp = ev.variance_at(t, float(p))
                if math.isfinite(vp):
                    assert v_opt <= vp * (1 + 1e-9) + 1e-300
