import math

import numpy as np
import pytest
from scipy import integrate, stats

from cohortmix import (CohortFunctions, DegenerateDesignError, DistributionSpec as Dist,
                       PowerEffect, SimulationPlan, generate_cohort, run_experiment)
from cohortmix.simulate import generate_cohort_arrays
from conftest import make_design


class TestGenerateCohort:
    def test_all_incident(self, baseline):
        d = baseline.with_pi(1.0)
        records = generate_cohort(d, np.random.default_rng(0))
        assert len(records) == 1000
        assert all(r.kind == "incident" and r.entry == 0.0 for r in records)

    def test_counts_exact(self, baseline):
        d = baseline.with_pi(0.25)
        records = generate_cohort(d, np.random.default_rng(1))
        assert sum(r.kind == "incident" for r in records) == 250

    def test_never_dying_cohort_all_censored(self):
        d = make_design(survival=Dist.point_mass(50.0))
        records = generate_cohort(d, np.random.default_rng(2))
        assert not any(r.event for r in records)

    def test_prevalent_constraints(self, baseline):
        entry, time, event, inc = generate_cohort_arrays(
            baseline, np.random.default_rng(3))
        prev = ~inc
        assert np.all(entry[prev] < baseline.tau)
        assert np.all(entry[prev] <= time[prev])
        # administrative censoring: nobody is observed beyond entry+theta or tau
        assert np.all(time <= np.minimum(entry + baseline.theta, baseline.tau) + 1e-12)

    def test_reproducible(self, baseline):
        a = generate_cohort_arrays(baseline, np.random.default_rng(77))
        b = generate_cohort_arrays(baseline, np.random.default_rng(77))
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_degenerate_design_raises(self):
        d = make_design(arrival=Dist.point_mass(12.0))
        with pytest.raises(DegenerateDesignError):
            generate_cohort_arrays(d, np.random.default_rng(0))

    def test_entry_marginal_matches_length_biased_law(self, baseline):
        """Accepted entries follow h(a) S(a) / denominator on [0, tau)."""
        cf = CohortFunctions(baseline)
        d = baseline.with_pi(0.0)
        rng = np.random.default_rng(11)
        draws = []
        for rep in range(134):
            entry, *_ = generate_cohort_arrays(d, rng)
            draws.append(entry)
        draws = np.concatenate(draws)

        grid = np.linspace(0.0, baseline.tau, 2001)
        dens = (np.asarray(baseline.arrival.pdf(grid))
                * np.asarray(baseline.survival.sf(grid)) / cf.denominator)
        cdf_grid = integrate.cumulative_trapezoid(dens, grid, initial=0.0)
        cdf_grid /= cdf_grid[-1]

        def cdf(x):
            return np.interp(x, grid, cdf_grid)

        res = stats.kstest(draws, cdf)
        assert res.pvalue > 0.001


class TestRiskAndVariance:
    def test_mean_risk_at_origin_exact(self):
        # fixed-count typing: at t=0 every replication holds exactly round(n pi)
        # incident subjects at risk
        d = make_design(n=4, theta=7.5)
        plan = SimulationPlan(design=d, replications=50, seed=5,
                              experiment="risk_and_variance", pi_values=(0.25,),
                              grid=(0.0, 5.0))
        report = run_experiment(plan)
        row = next(r for r in report.rows
                   if r["statistic"] == "y_incident" and r["t"] == 0.0)
        assert row["empirical"] == 1.0

    def test_agreement_with_theory(self, baseline):
        plan = SimulationPlan(design=baseline, replications=400, seed=9,
                              experiment="risk_and_variance", pi_values=(0.5,),
                              grid=tuple(float(t) for t in range(11)))
        report = run_experiment(plan)
        for row in report.rows:
            if row["statistic"].startswith("y_"):
                se = row["se"]
                assert abs(row["empirical"] - row["theoretical"]) <= 6 * se + 1e-9

    def test_deterministic_and_thread_invariant(self, baseline):
        kw = dict(design=baseline, replications=30, seed=123,
                  experiment="risk_and_variance", pi_values=(0.25, 0.75),
                  grid=(0.0, 2.0, 8.0))
        r1 = run_experiment(SimulationPlan(**kw, threads=1))
        r2 = run_experiment(SimulationPlan(**kw, threads=1))
        r4 = run_experiment(SimulationPlan(**kw, threads=4))
        assert r1.rows == r2.rows == r4.rows

    def test_split_and_pool_consistency(self, baseline):
        """Two seeded halves pool to within Monte Carlo error of a single run."""
        base = dict(design=baseline, experiment="risk_and_variance",
                    pi_values=(0.5,), grid=(5.0,))
        full = run_experiment(SimulationPlan(replications=400, seed=21, **base))
        h1 = run_experiment(SimulationPlan(replications=200, seed=22, **base))
        h2 = run_experiment(SimulationPlan(replications=200, seed=23, **base))

        def grab(rep):
            row = next(r for r in rep.rows if r["statistic"] == "y_prevalent")
            return row["empirical"], row["se"]

        vf, se_f = grab(full)
        v1, _ = grab(h1)
        v2, _ = grab(h2)
        pooled = 0.5 * (v1 + v2)
        assert abs(pooled - vf) <= 4 * se_f * math.sqrt(2)


class TestFailureCounts:
    def test_all_censored_design(self):
        d = make_design(survival=Dist.point_mass(50.0))
        plan = SimulationPlan(design=d, replications=20, seed=3,
                              experiment="failure_counts", pi_values=(0.5,))
        report = run_experiment(plan)
        for row in report.rows:
            assert row["empirical"] == 0.0
            assert row["theoretical"] == pytest.approx(0.0, abs=1e-12)

    def test_no_incident_failures_at_pi_zero(self, baseline):
        plan = SimulationPlan(design=baseline, replications=20, seed=4,
                              experiment="failure_counts", pi_values=(0.0,))
        report = run_experiment(plan)
        row = next(r for r in report.rows if r["statistic"] == "failures_incident")
        assert row["empirical"] == 0.0
        assert row["theoretical"] == pytest.approx(0.0, abs=1e-12)

    def test_agreement_small_run(self, baseline):
        plan = SimulationPlan(design=baseline, replications=600, seed=6,
                              experiment="failure_counts", pi_values=(0.5,))
        report = run_experiment(plan)
        for row in report.rows:
            assert abs(row["empirical"] - row["theoretical"]) <= 6 * row["se"]


class TestEmpiricalAre:
    def test_identical_mixes_give_unit_ratio(self, baseline):
        plan = SimulationPlan(design=baseline, replications=150, seed=8,
                              experiment="empirical_are", pi_values=(0.5,),
                              comparison_pis=(0.5,))
        report = run_experiment(plan)
        row = next(r for r in report.rows if r["statistic"] == "empirical_are")
        assert row["empirical"] == pytest.approx(1.0, rel=1e-12)

    def test_exhausted_comparison_is_infinite(self):
        d = make_design(theta=5.0)
        plan = SimulationPlan(design=d, replications=60, seed=9,
                              experiment="empirical_are", pi_values=(0.39,),
                              comparison_pis=(1.0,))
        report = run_experiment(plan)
        row = next(r for r in report.rows if r["statistic"] == "empirical_are")
        assert math.isinf(row["empirical"])


class TestEmpiricalPower:
    def test_null_effect_size(self, baseline):
        plan = SimulationPlan(design=baseline, replications=400, seed=10,
                              experiment="empirical_power", pi_values=(0.5,),
                              power_effect=PowerEffect(beta=0.0, group_sizes=(100, 100)))
        report = run_experiment(plan)
        row = report.rows[0]
        assert abs(row["empirical"] - 0.05) < 0.035  # 400 reps, ~3 SE

    def test_requires_effect(self, baseline):
        plan = SimulationPlan(design=baseline, replications=5,
                              experiment="empirical_power", pi_values=(0.5,))
        with pytest.raises(ValueError):
            run_experiment(plan)

    def test_power_direction_matches_criterion(self):
        d = make_design(theta=7.5)
        plan = SimulationPlan(design=d, replications=500, seed=12,
                              experiment="empirical_power", pi_values=(0.0, 1.0),
                              power_effect=PowerEffect(beta=0.3, censor_shapes=(1.0,)))
        report = run_experiment(plan)
        p = {r["pi"]: r["empirical"] for r in report.rows}
        # theta=7.5 c=1: criterion prefers prevalent; empirical should agree
        assert report.diagnostics["criterion_pi_opt_by_censor_shape"][1.0] == 0.0
        assert p[0.0] > p[1.0]


class TestDropoutDesignAgreement:
    def test_theory_matches_simulation_with_dropout(self):
        """At-risk curves and failure counts stay accurate when non-administrative
        dropout multiplies both the censoring process and the theory curves."""
        d = make_design(theta=3.0, n=1000,
                        survival=Dist.weibull(0.75, 4.25),
                        arrival=Dist.weibull(1.40, 4.25),
                        dropout=Dist.exponential(4.5))
        plan = SimulationPlan(design=d, replications=500, seed=31,
                              experiment="risk_and_variance", pi_values=(0.26,),
                              grid=(0.0, 1.0, 2.5, 5.0, 8.0))
        report = run_experiment(plan)
        for row in report.rows:
            if row["statistic"].startswith("y_") and row["se"] > 0:
                assert abs(row["empirical"] - row["theoretical"]) <= 6 * row["se"]
        plan2 = SimulationPlan(design=d, replications=500, seed=32,
                               experiment="failure_counts", pi_values=(0.26,))
        report2 = run_experiment(plan2)
        for row in report2.rows:
            if row["se"] > 0:
                assert abs(row["empirical"] - row["theoretical"]) <= 6 * row["se"]


@pytest.mark.slow
class TestWeightedEmpiricalAre:
    def test_weighted_precision_gains(self):
        """Empirical efficiency of the weighted optima against the even mix."""
        from cohortmix.presets import (FIG2_PUBLISHED, FIG2_THETA, FIG2_WEIGHTS,
                                       baseline_design)

        for wname, w in FIG2_WEIGHTS.items():
            plan = SimulationPlan(
                design=baseline_design(theta=FIG2_THETA, weight=w),
                replications=6000, seed=42, experiment="empirical_are",
                pi_values=(FIG2_PUBLISHED[wname]["pi_opt"],),
                comparison_pis=(0.5,))
            rep = run_experiment(plan)
            are = next(r["empirical"] for r in rep.rows
                       if r["statistic"] == "empirical_are")
            assert are == pytest.approx(FIG2_PUBLISHED[wname]["are_even"], abs=0.05)
