import math

import numpy as np
import pytest

from cohortmix import (CurveObjective, DistributionSpec as Dist, objective_k,
                       orthogonality_residual, variance_at, variance_curve)
from conftest import make_design, random_design


@pytest.fixture(scope="module")
def ev_theta5():
    return CurveObjective(make_design(theta=5.0))


class TestVarianceAt:
    def test_zero_at_origin(self, ev_theta5):
        assert ev_theta5.variance_at(0.0, 0.5) == 0.0

    def test_infinite_past_incident_exhaustion(self, ev_theta5):
        # all incident with uniform entry: nobody at risk after theta
        assert math.isinf(ev_theta5.variance_at(6.0, 1.0))
        assert math.isinf(ev_theta5.variance_at(9.9, 1.0))
        assert math.isfinite(ev_theta5.variance_at(4.0, 1.0))

    def test_all_prevalent_is_finite(self, ev_theta5):
        v = ev_theta5.variance_at(5.0, 0.0)
        assert math.isfinite(v) and v > 0

    def test_nonnegative_and_monotone_inner(self, ev_theta5):
        grid = np.linspace(0, 10, 21)
        vals = ev_theta5.variance_curve(grid, 0.5).values
        assert np.all(vals >= 0)
        assert np.all(np.isfinite(vals))

    def test_curve_matches_pointwise(self, ev_theta5):
        grid = np.array([1.0, 3.3, 7.7])
        curve = ev_theta5.variance_curve(grid, 0.4).values
        for t, v in zip(grid, curve):
            assert v == pytest.approx(ev_theta5.variance_at(t, 0.4), rel=1e-9)


class TestObjective:
    def test_zero_when_no_failures_in_window(self):
        d = make_design(survival=Dist.point_mass(50.0))
        assert objective_k(d, 0.5) == 0.0

    def test_table1_theta5_even_mix_ratio(self, ev_theta5):
        # published efficiency of the optimum against the even mix
        are = ev_theta5.k(0.5) / ev_theta5.k(0.389)
        assert are == pytest.approx(1.03, abs=0.02)

    def test_convexity_midpoint(self, ev_theta5):
        ks = [ev_theta5.k(p) for p in (0.2, 0.4, 0.6)]
        assert ks[1] <= 0.5 * (ks[0] + ks[2]) + 1e-15

    def test_infinite_all_incident_short_window(self, ev_theta5):
        assert math.isinf(ev_theta5.k(1.0))

    def test_reduced_equals_nested(self):
        rng = np.random.default_rng(11)
        designs = [make_design(theta=7.5), make_design(theta=5.0),
                   make_design(weight=Dist.beta4(1, 4, 0, 10)),
                   random_design(rng)]
        for d in designs:
            ev = CurveObjective(d)
            for pi in (0.25, 0.5, 0.75):
                kr = ev.k(pi, method="reduced")
                kn = ev.k(pi, method="nested")
                assert kn == pytest.approx(kr, rel=1e-6)

    def test_convexity_second_differences(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            ev = CurveObjective(random_design(rng))
            pis = np.linspace(0.02, 0.98, 21)
            ks = np.array([ev.k(p) for p in pis])
            finite = np.isfinite(ks)
            kf = ks[finite]
            if kf.size >= 3:
                second = kf[2:] - 2 * kf[1:-1] + kf[:-2]
                assert np.all(second >= -1e-9 * np.abs(kf[1:-1]).max())


class TestResidual:
    def test_matches_central_difference(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            d = random_design(rng)
            ev = CurveObjective(d)
            for pi in rng.uniform(0.15, 0.85, 5):
                h = 1e-5
                dk = (ev.k(pi + h) - ev.k(pi - h)) / (2 * h)
                res = ev.residual(pi)
                expected = -dk / d.n
                assert res == pytest.approx(expected, rel=1e-4, abs=1e-12)

    def test_near_zero_at_interior_optimum(self, ev_theta5):
        from cohortmix import optimize_curve
        result = optimize_curve(make_design(theta=5.0))
        assert result.boundary == "interior"
        k_opt = result.objective_value / 1000
        assert abs(result.residual_at_opt) < 1e-5 * k_opt

    def test_positive_everywhere_when_incident_dominates(self):
        # late point-mass arrival: prevalent patients barely exist, so the
        # at-risk gap stays positive and no interior optimum can exist
        d = make_design(theta=10.0, arrival=Dist.point_mass(9.99))
        ev = CurveObjective(d)
        for pi in (0.1, 0.3, 0.5, 0.7, 0.9):
            assert ev.residual(pi) > 0

    def test_residual_brackets_the_optimum(self):
        # -residual is proportional to dK/dpi, so it must change sign across
        # an interior minimum
        from cohortmix import optimize_curve

        d = make_design(theta=5.0)
        ev = CurveObjective(d)
        pi_opt = optimize_curve(d, evaluator=ev).pi_opt
        assert ev.residual(pi_opt - 0.1) * ev.residual(pi_opt + 0.1) < 0

    def test_fixed_time_mode_finite(self, baseline):
        ev = CurveObjective(baseline)
        assert math.isfinite(ev.residual(0.5, mode="fixed_time", t=10.0))


class TestWrappers:
    def test_oneshot_wrappers_agree(self, baseline):
        ev = CurveObjective(baseline)
        assert variance_at(baseline, 5.0) == pytest.approx(ev.variance_at(5.0), rel=1e-12)
        assert objective_k(baseline) == pytest.approx(ev.k(), rel=1e-12)
        res = orthogonality_residual(baseline, 0.5)
        assert res == pytest.approx(ev.residual(0.5), rel=1e-12)
        grid = np.linspace(0, 10, 5)
        np.testing.assert_allclose(variance_curve(baseline, grid).values,
                                   ev.variance_curve(grid).values, rtol=1e-12)
