"""Monte Carlo generation of period-prevalent cohorts and validation runs.

Each replication owns its own random stream derived from (seed, cell,
replication), so reports are bit-identical for a given plan regardless of
thread count or execution order. Prevalent subjects are drawn by rejection
on (A*, T*) pairs, which samples the left-truncated joint law exactly; the
acceptance rate equals the design's truncation probability.

Every subject is additionally censored at the assessment limit tau: the
estimand lives on [0, tau], and the theoretical failure integrals the runs
are validated against stop there.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as spstats

from .design import CohortFunctions, DegenerateDesignError, StudyDesign, truncation_denominator
from .distributions import DistributionSpec
from .estimators import SubjectRecord, km_fit_arrays, cox_score_test_arrays
from .inference import EffectSpec, _power_survival, cox_criterion, theoretical_power
from .objective import CurveObjective

MAX_REJECTION_DRAWS = 10_000_000
MIN_ACCEPTANCE = 1e-6

EXPERIMENTS = ("risk_and_variance", "failure_counts", "empirical_are", "empirical_power")


@dataclass(frozen=True)
class PowerEffect:
    """Two-group power experiment settings."""

    beta: float
    group_sizes: Tuple[int, int] = (500, 500)
    alpha: float = 0.05
    censor_shapes: Tuple[float, ...] = (1.0,)   # Beta(c, 1) incident censoring sweep


@dataclass(frozen=True)
class SimulationPlan:
    design: StudyDesign
    replications: int
    seed: int = 42
    experiment: str = "risk_and_variance"
    grid: Optional[Tuple[float, ...]] = None
    pi_values: Tuple[float, ...] = (0.25, 0.5, 0.75)
    comparison_pis: Tuple[float, ...] = (0.5, 0.0, 1.0)
    power_effect: Optional[PowerEffect] = None
    threads: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")

    def resolved_grid(self) -> np.ndarray:
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
        else:
            g = np.linspace(0.0, self.design.tau, 201)
        if np.any(g < 0) or np.any(g > self.design.tau):
            raise ValueError("grid must lie within [0, tau]")
        return g


def _design_salt(design: StudyDesign) -> int:
    """Stable fingerprint so different designs at one seed use distinct streams.

    Without it, two runs over different active-window lengths would feed the
    same uniforms into (identical) arrival/survival draws, correlating
    Monte Carlo error across the rows of a sweep.
    """
    from zlib import crc32

    from .config import emit_design

    return crc32(repr(sorted(emit_design(design).items())).encode())


def _rep_rng(seed: int, salt: int, cell: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(salt, cell, rep)))


# -- cohort generation ---------------------------------------------------------


def _draw_prevalent(design: StudyDesign, rng: np.random.Generator, count: int,
                    survival: Optional[DistributionSpec] = None):
    """Rejection-sample (A, T*) from the observable prevalent joint law."""
    surv = survival or design.survival
    accept = truncation_denominator(StudyDesign(
        theta=design.theta, tau=design.tau, n=design.n, pi_incident=design.pi_incident,
        survival=surv, arrival=design.arrival, incident_entry=design.incident_entry,
        weight=design.weight, dropout=None))
    if accept < MIN_ACCEPTANCE:
        raise DegenerateDesignError(
            f"prevalent acceptance probability {accept:.2e} below {MIN_ACCEPTANCE}")
    entries = np.empty(count)
    lifetimes = np.empty(count)
    got = 0
    drawn = 0
    while got < count:
        k = max(64, int(1.3 * (count - got) / accept) + 16)
        if drawn + k > MAX_REJECTION_DRAWS:
            raise DegenerateDesignError(
                f"rejection sampling exceeded {MAX_REJECTION_DRAWS} draws")
        a = design.arrival.sample(rng, k)
        t = surv.sample(rng, k)
        drawn += k
        ok = (a <= t) & (a < design.tau)
        take = min(int(ok.sum()), count - got)
        entries[got:got + take] = a[ok][:take]
        lifetimes[got:got + take] = t[ok][:take]
        got += take
    return entries, lifetimes


def generate_cohort_arrays(design: StudyDesign, rng: np.random.Generator,
                           survival: Optional[DistributionSpec] = None,
                           n_override: Optional[int] = None):
    """Arrays (entry, time, event, is_incident) for one simulated cohort."""
    surv = survival or design.survival
    n = design.n if n_override is None else n_override
    m_inc = int(round(n * design.pi_incident))
    m_prev = n - m_inc

    if m_prev > 0:
        a, t_star = _draw_prevalent(design, rng, m_prev, survival=surv)
        censor_p = np.minimum(a + design.theta, design.tau)
        if design.dropout is not None:
            censor_p = np.minimum(censor_p, design.dropout.sample(rng, m_prev))
        # dropout can precede study entry: such subjects are recruited but
        # leave immediately (censored at entry, never at risk), which is what
        # keeps the truncation conditioning free of the dropout law
        time_p = np.maximum(np.minimum(t_star, censor_p), a)
        event_p = t_star < censor_p
    else:
        a = time_p = np.empty(0)
        event_p = np.empty(0, dtype=bool)

    if m_inc > 0:
        t_star = surv.sample(rng, m_inc)
        u = design.incident_entry.sample(rng, m_inc)
        censor_i = np.minimum(u * design.theta, design.tau)
        if design.dropout is not None:
            censor_i = np.minimum(censor_i, design.dropout.sample(rng, m_inc))
        time_i = np.minimum(t_star, censor_i)
        event_i = t_star < censor_i
    else:
        time_i = np.empty(0)
        event_i = np.empty(0, dtype=bool)

    entry = np.concatenate([a, np.zeros(m_inc)])
    time = np.concatenate([time_p, time_i])
    event = np.concatenate([event_p, event_i])
    is_incident = np.concatenate([np.zeros(m_prev, dtype=bool),
                                  np.ones(m_inc, dtype=bool)])
    return entry, time, event, is_incident


def generate_cohort(design: StudyDesign, rng: np.random.Generator) -> List[SubjectRecord]:
    entry, time, event, inc = generate_cohort_arrays(design, rng)
    return [
        SubjectRecord(entry=float(e), time=float(t), event=bool(v),
                      kind="incident" if i else "prevalent")
        for e, t, v, i in zip(entry, time, event, inc)
    ]


# -- reports --------------------------------------------------------------------


@dataclass
class ExperimentReport:
    experiment: str
    seed: int
    replications: int
    rows: List[dict] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    COLUMNS = ("experiment", "pi", "t", "statistic", "empirical", "theoretical", "se")

    def add(self, pi, t, statistic, empirical, theoretical, se):
        self.rows.append({
            "experiment": self.experiment, "pi": pi, "t": t, "statistic": statistic,
            "empirical": empirical, "theoretical": theoretical, "se": se,
        })

    def summary_lines(self) -> List[str]:
        lines = [f"experiment: {self.experiment}",
                 f"seed: {self.seed}",
                 f"replications: {self.replications}"]
        for k, v in sorted(self.diagnostics.items()):
            lines.append(f"{k}: {v}")
        return lines


def _run_cells(cells, worker, threads: int):
    if threads <= 1 or len(cells) <= 1:
        return [worker(i, c) for i, c in enumerate(cells)]
    results = [None] * len(cells)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(worker, i, c): i for i, c in enumerate(cells)}
        for fut, i in futures.items():
            results[i] = fut.result()
    return results


def _moments(acc1, acc2, r):
    mean = acc1 / r
    var = (acc2 - r * mean * mean) / (r - 1) if r > 1 else np.zeros_like(mean)
    return mean, np.maximum(var, 0.0)


def run_risk_and_variance(plan: SimulationPlan) -> ExperimentReport:
    """Empirical mean risk sets by type and Var[S_hat(t)] against theory."""
    grid = plan.resolved_grid()
    design = plan.design
    report = ExperimentReport("risk_and_variance", plan.seed, plan.replications)

    def cell_worker(cell_idx, pi):
        d = design.with_pi(pi)
        salt = _design_salt(d)
        r = plan.replications
        yp1 = np.zeros(grid.size); yp2 = np.zeros(grid.size)
        yi1 = np.zeros(grid.size); yi2 = np.zeros(grid.size)
        s_mom = np.zeros((4, grid.size))
        for rep in range(r):
            rng = _rep_rng(plan.seed, salt, cell_idx, rep)
            entry, time, event, inc = generate_cohort_arrays(d, rng)
            yp = _risk_count(entry[~inc], time[~inc], grid)
            yi = _risk_count(entry[inc], time[inc], grid)
            curve = km_fit_arrays(entry, time, event)
            s, _ = curve.evaluate(grid)
            yp1 += yp; yp2 += yp * yp
            yi1 += yi; yi2 += yi * yi
            for m in range(4):
                s_mom[m] += s ** (m + 1)
        return yp1, yp2, yi1, yi2, s_mom

    results = _run_cells(list(plan.pi_values), cell_worker, plan.threads)

    max_dev = 0.0
    for pi, (yp1, yp2, yi1, yi2, s_mom) in zip(plan.pi_values, results):
        d = design.with_pi(pi)
        cf = CohortFunctions(d)
        obj = CurveObjective(d)
        r = plan.replications
        th_yp = np.asarray(cf.y_prevalent(grid))
        th_yi = np.asarray(cf.y_incident(grid))
        th_var = obj.variance_curve(grid).values
        mean_yp, var_yp = _moments(yp1, yp2, r)
        mean_yi, var_yi = _moments(yi1, yi2, r)
        m1 = s_mom[0] / r
        m2 = s_mom[1] / r - m1 ** 2
        m4c = (s_mom[3] / r - 4 * m1 * s_mom[2] / r + 6 * m1 ** 2 * s_mom[1] / r
               - 3 * m1 ** 4)
        var_s = m2 * r / (r - 1) if r > 1 else m2
        se_var = np.sqrt(np.maximum(m4c - m2 ** 2, 0.0) / r)
        for t, e, th, se in zip(grid, mean_yp, th_yp, np.sqrt(var_yp / r)):
            report.add(pi, float(t), "y_prevalent", float(e), float(th), float(se))
            if se > 0:
                max_dev = max(max_dev, abs(e - th) / se)
        for t, e, th, se in zip(grid, mean_yi, th_yi, np.sqrt(var_yi / r)):
            report.add(pi, float(t), "y_incident", float(e), float(th), float(se))
            if se > 0:
                max_dev = max(max_dev, abs(e - th) / se)
        for t, e, th, se in zip(grid, var_s, th_var, se_var):
            report.add(pi, float(t), "variance", float(e), float(th), float(se))
    report.diagnostics["max_standardized_risk_deviation"] = max_dev
    return report


def _risk_count(entry, time, grid):
    if entry.size == 0:
        return np.zeros(grid.size)
    se = np.sort(entry)
    st = np.sort(time)
    return (np.searchsorted(se, grid, side="right")
            - np.searchsorted(st, grid, side="left")).astype(float)


def run_failure_counts(plan: SimulationPlan) -> ExperimentReport:
    """Mean observed failures by type against n * integral of D_type."""
    design = plan.design
    report = ExperimentReport("failure_counts", plan.seed, plan.replications)

    def cell_worker(cell_idx, pi):
        d = design.with_pi(pi)
        salt = _design_salt(d)
        r = plan.replications
        acc = np.zeros((2, 2))  # [type, (sum, sumsq)]
        for rep in range(r):
            rng = _rep_rng(plan.seed, salt, cell_idx, rep)
            entry, time, event, inc = generate_cohort_arrays(d, rng)
            np_ev = float(np.sum(event & ~inc))
            ni_ev = float(np.sum(event & inc))
            acc[0] += (np_ev, np_ev ** 2)
            acc[1] += (ni_ev, ni_ev ** 2)
        return acc

    results = _run_cells(list(plan.pi_values), cell_worker, plan.threads)
    max_dev = 0.0
    for pi, acc in zip(plan.pi_values, results):
        d = design.with_pi(pi)
        cf = CohortFunctions(d)
        pts = cf.breakpoints()
        from scipy import integrate as _si
        th_prev = d.n * _si.quad(lambda t: float(cf.d_prevalent(t)), 0, d.tau,
                                 points=pts or None, limit=400)[0]
        th_inc = d.n * _si.quad(lambda t: float(cf.d_incident(t)), 0, d.tau,
                                points=pts or None, limit=400)[0]
        r = plan.replications
        for name, (s1, s2), th in (("failures_prevalent", acc[0], th_prev),
                                   ("failures_incident", acc[1], th_inc)):
            mean = s1 / r
            var = max((s2 - r * mean * mean) / (r - 1), 0.0) if r > 1 else 0.0
            se = math.sqrt(var / r)
            report.add(pi, None, name, float(mean), float(th), float(se))
            if se > 0:
                max_dev = max(max_dev, abs(mean - th) / se)
    report.diagnostics["max_standardized_failure_deviation"] = max_dev
    return report


def run_empirical_are(plan: SimulationPlan) -> ExperimentReport:
    """Weighted empirical-variance ratios against alternative mixes.

    The first pi in pi_values is the reference (normally the optimum); each
    comparison mix contributes ARE = K_emp(comparison)/K_emp(reference).
    A comparison whose expected risk set is exhausted before tau has an
    infinite empirical ARE (its curve cannot be estimated at positively
    weighted times).
    """
    grid = plan.resolved_grid()
    design = plan.design
    pi_ref = plan.pi_values[0]
    # identical mixes share one simulated cell: re-simulating the same design
    # under another stream would only add noise to a ratio that is exactly 1
    unique_pis = list(dict.fromkeys([pi_ref, *plan.comparison_pis]))
    report = ExperimentReport("empirical_are", plan.seed, plan.replications)

    wdens = np.asarray(design.weight.pdf(grid))
    wdens = np.where(np.isfinite(wdens), wdens, 0.0)

    def emp_k(var_curve):
        return float(np.trapezoid(wdens * var_curve, grid))

    def cell_worker(cell_idx, pi):
        d = design.with_pi(pi)
        if CurveObjective(d).live_profile(pi).t_infinity < d.tau:
            return None  # risk exhausted before tau: empirical curve undefined
        salt = _design_salt(d)
        r = plan.replications
        s1 = np.zeros(grid.size); s2 = np.zeros(grid.size)
        for rep in range(r):
            rng = _rep_rng(plan.seed, salt, cell_idx, rep)
            entry, time, event, _ = generate_cohort_arrays(d, rng)
            s, _e = km_fit_arrays(entry, time, event).evaluate(grid)
            s1 += s; s2 += s * s
        _, var = _moments(s1, s2, r)
        return var

    results = dict(zip(unique_pis, _run_cells(unique_pis, cell_worker, plan.threads)))
    ref = results[pi_ref]
    if ref is None:
        raise DegenerateDesignError("reference design exhausts its risk set before tau")
    k_ref = emp_k(ref)
    report.add(pi_ref, None, "empirical_k", k_ref, None, None)
    for pi in plan.comparison_pis:
        var = results[pi]
        if var is None:
            report.add(pi, None, "empirical_are", math.inf, None, None)
        else:
            if pi != pi_ref:
                report.add(pi, None, "empirical_k", emp_k(var), None, None)
            report.add(pi, None, "empirical_are", emp_k(var) / k_ref, None, None)
    return report


def run_empirical_power(plan: SimulationPlan) -> ExperimentReport:
    """Two-group Cox score-test rejection rates across mixes and censor laws."""
    if plan.power_effect is None:
        raise ValueError("empirical_power needs plan.power_effect")
    eff = plan.power_effect
    design = plan.design
    n1, n2 = eff.group_sizes
    crit = float(spstats.chi2.ppf(1.0 - eff.alpha, 1))
    surv2 = _power_survival(design.survival, math.exp(eff.beta))
    report = ExperimentReport("empirical_power", plan.seed, plan.replications)

    cells = [(c, pi) for c in eff.censor_shapes for pi in plan.pi_values]

    def cell_worker(cell_idx, cell):
        c, pi = cell
        entry_spec = (DistributionSpec.uniform(0, 1) if c == 1.0
                      else DistributionSpec.beta(c, 1.0))
        d1 = StudyDesign(theta=design.theta, tau=design.tau, n=n1, pi_incident=pi,
                         survival=design.survival, arrival=design.arrival,
                         incident_entry=entry_spec, weight=design.weight,
                         dropout=design.dropout)
        d2 = StudyDesign(theta=design.theta, tau=design.tau, n=n2, pi_incident=pi,
                         survival=surv2, arrival=design.arrival,
                         incident_entry=entry_spec, weight=design.weight,
                         dropout=design.dropout)
        salt = _design_salt(d1) ^ _design_salt(d2)
        rej = 0
        for rep in range(plan.replications):
            rng = _rep_rng(plan.seed, salt, cell_idx, rep)
            e1, t1, v1, _ = generate_cohort_arrays(d1, rng)
            e2, t2, v2, _ = generate_cohort_arrays(d2, rng)
            entry = np.concatenate([e1, e2])
            time = np.concatenate([t1, t2])
            event = np.concatenate([v1, v2])
            x = np.concatenate([np.zeros(len(e1)), np.ones(len(e2))])
            if not np.any(event):
                continue
            res = cox_score_test_arrays(entry, time, event, x,
                                        estimate_hazard_ratio=False)
            if res["score_statistic"] > crit:
                rej += 1
        return rej / plan.replications

    results = _run_cells(cells, cell_worker, plan.threads)
    for (c, pi), rate in zip(cells, results):
        entry_spec = (DistributionSpec.uniform(0, 1) if c == 1.0
                      else DistributionSpec.beta(c, 1.0))
        d_theory = StudyDesign(theta=design.theta, tau=design.tau, n=n1 + n2,
                               pi_incident=pi, survival=design.survival,
                               arrival=design.arrival, incident_entry=entry_spec,
                               weight=design.weight, dropout=design.dropout)
        th = theoretical_power(
            d_theory,
            EffectSpec(log_hr=eff.beta, predictor_variance=(n1 * n2) / (n1 + n2) ** 2,
                       group_fraction=n2 / (n1 + n2)),
            eff.alpha)
        se = math.sqrt(max(rate * (1 - rate), 1e-12) / plan.replications)
        report.add(pi, None, f"power_c={c:g}", rate, th, se)

    # theoretical decision flip along the censor sweep
    flips = {}
    for c in eff.censor_shapes:
        entry_spec = (DistributionSpec.uniform(0, 1) if c == 1.0
                      else DistributionSpec.beta(c, 1.0))
        d_theory = StudyDesign(theta=design.theta, tau=design.tau, n=n1 + n2,
                               pi_incident=0.5, survival=design.survival,
                               arrival=design.arrival, incident_entry=entry_spec,
                               weight=design.weight, dropout=design.dropout)
        flips[c] = cox_criterion(d_theory).pi_opt
    report.diagnostics["criterion_pi_opt_by_censor_shape"] = flips
    return report


def run_experiment(plan: SimulationPlan) -> ExperimentReport:
    runner = {
        "risk_and_variance": run_risk_and_variance,
        "failure_counts": run_failure_counts,
        "empirical_are": run_empirical_are,
        "empirical_power": run_empirical_power,
    }[plan.experiment]
    return runner(plan)
