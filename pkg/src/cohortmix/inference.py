"""Optimal-cohort criteria and theoretical power for two-group inference.

For the weighted log-rank test (weights proportional to the log hazard
ratio) and the Cox score test, the expected squared noncentrality is linear
in the incident fraction, so the most powerful cohort is entirely prevalent
or entirely incident. The decision reduces to comparing two integrals:

    incident side:  int_0^tau {log hr(t)}^2 f(t) (1 - G(t/theta)) dt
    prevalent side: int_0^tau {log hr(t)}^2 f(t) (H(t)-H(t-theta)) / denom dt

with b = incident - prevalent; recruit all-incident iff b > 0 (ties go to
prevalent). The criterion integrals are the administrative-censoring form;
a dropout law on the design affects estimation curves but not this
comparison (the published worked example pins the plain form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

from scipy import integrate, stats

from .design import CohortFunctions, StudyDesign
from .objective import CurveObjective

LogHazard = Union[float, Callable[[float], float]]


@dataclass(frozen=True)
class EffectSpec:
    """Alternative-hypothesis effect for the score-test power formula.

    group_fraction, when set, marks a two-arm comparison with that fraction
    in the elevated-hazard arm; expected failures are then pooled over both
    arms' survival laws instead of the baseline's alone.
    """

    log_hr: float
    predictor_variance: float = 0.25
    r_squared_adjustment: float = 0.0
    group_fraction: Optional[float] = 0.5

    def __post_init__(self):
        if not (self.predictor_variance > 0):
            raise ValueError("predictor variance must be positive")
        if not (0.0 <= self.r_squared_adjustment < 1.0):
            raise ValueError("r-squared adjustment must lie in [0, 1)")
        if self.group_fraction is not None and not (0.0 < self.group_fraction < 1.0):
            raise ValueError("group fraction must lie in (0, 1)")


@dataclass(frozen=True)
class InferenceDecision:
    """Outcome of the all-prevalent vs all-incident power comparison."""

    a_prevalent: float
    b_incident_minus_prevalent: float
    pi_opt: float                        # 0.0 or 1.0
    expected_failures_at_opt: float
    theoretical_power: float
    alpha: float
    incident_side: float
    prevalent_side: float

    def to_payload(self) -> dict:
        return {
            "a_prevalent": self.a_prevalent,
            "b_incident_minus_prevalent": self.b_incident_minus_prevalent,
            "pi_opt": self.pi_opt,
            "expected_failures_at_opt": self.expected_failures_at_opt,
            "theoretical_power": self.theoretical_power,
            "alpha": self.alpha,
            "incident_side": self.incident_side,
            "prevalent_side": self.prevalent_side,
        }


def _criterion_quad(fn, lo, hi, points):
    inner = sorted(p for p in points if lo < p < hi)
    val, _ = integrate.quad(fn, lo, hi, points=inner or None, limit=400,
                            epsabs=1e-12, epsrel=1e-9)
    return val


def _strip_dropout(design: StudyDesign) -> StudyDesign:
    if design.dropout is None:
        return design
    return StudyDesign(
        theta=design.theta, tau=design.tau, n=design.n,
        pi_incident=design.pi_incident, survival=design.survival,
        arrival=design.arrival, incident_entry=design.incident_entry,
        weight=design.weight, dropout=None)


def _criterion_sides(design: StudyDesign, log_hr: LogHazard):
    """The two failure-count comparison integrals, per subject, without dropout."""
    d = design
    if callable(log_hr):
        w2 = lambda t: float(log_hr(t)) ** 2
    else:
        w2 = lambda t: float(log_hr) ** 2
    cf = CohortFunctions(_strip_dropout(d))
    pts = cf.breakpoints()

    def inc(t):
        gu = float(d.incident_entry.cdf(min(t / d.theta, 1.0)))
        return w2(t) * float(d.survival.pdf(t)) * (1.0 - gu)

    def prev(t):
        window = float(d.arrival.cdf(t)) - float(d.arrival.cdf(t - d.theta))
        return w2(t) * float(d.survival.pdf(t)) * window / cf.denominator

    incident_side = _criterion_quad(inc, 0.0, min(d.theta, d.tau), pts)
    prevalent_side = _criterion_quad(prev, 0.0, d.tau, pts)
    return incident_side, prevalent_side


def logrank_criterion(design: StudyDesign, log_hr: LogHazard,
                      alpha: float = 0.05,
                      effect: Optional[EffectSpec] = None) -> InferenceDecision:
    """Optimal cohort for the optimally-weighted log-rank test.

    Recruits all-incident iff the incident-side integral exceeds the
    prevalent-side one; the decision is invariant to rescaling log_hr.
    """
    incident_side, prevalent_side = _criterion_sides(design, log_hr)
    a = prevalent_side
    b = incident_side - prevalent_side
    pi_opt = 1.0 if b > 0 else 0.0
    expected = design.n * max(a, a + b)
    power = (theoretical_power(design.with_pi(pi_opt), effect, alpha)
             if effect is not None else math.nan)
    return InferenceDecision(
        a_prevalent=a,
        b_incident_minus_prevalent=b,
        pi_opt=pi_opt,
        expected_failures_at_opt=expected,
        theoretical_power=power,
        alpha=alpha,
        incident_side=incident_side,
        prevalent_side=prevalent_side,
    )


def cox_criterion(design: StudyDesign, effect: Optional[EffectSpec] = None,
                  alpha: float = 0.05) -> InferenceDecision:
    """Corollary-1 decision: the log-rank criterion with a constant hazard ratio.

    A constant {log hr}^2 cancels from the comparison, so the sides reported
    here are the plain expected-failure integrals per subject type; the
    effect spec only enters the power calculation.
    """
    return logrank_criterion(design, 1.0, alpha=alpha, effect=effect)


def _pooled_event_integral(design: StudyDesign, effect: EffectSpec) -> float:
    """Per-subject expected failures on [0,tau] under the alternative.

    Two-arm effects average the baseline arm and the elevated arm, the
    latter with survival S^exp(log_hr) and its own truncation conditioning.
    """
    base = CohortFunctions(design)
    d0 = base.expected_failures() / design.n
    if effect.group_fraction is None or effect.log_hr == 0.0:
        return d0
    alt = StudyDesign(
        theta=design.theta, tau=design.tau, n=design.n,
        pi_incident=design.pi_incident,
        survival=_power_survival(design.survival, math.exp(effect.log_hr)),
        arrival=design.arrival, incident_entry=design.incident_entry,
        weight=design.weight, dropout=design.dropout,
    )
    d1 = CohortFunctions(alt).expected_failures() / design.n
    q = effect.group_fraction
    return (1.0 - q) * d0 + q * d1


def _power_survival(spec, exponent: float):
    """Distribution of the elevated-hazard arm: S_alt = S^exponent.

    Exact for the proportional-hazards families used here; exponential and
    Weibull are closed under hazard scaling.
    """
    from .distributions import DistributionSpec

    if spec.family == "exponential":
        return DistributionSpec.exponential(spec.params[0] / exponent)
    if spec.family == "weibull":
        shape, scale = spec.params
        return DistributionSpec.weibull(shape, scale * exponent ** (-1.0 / shape))
    raise ValueError(
        f"no closed proportional-hazards transform for {spec.family}; "
        "supply the elevated arm explicitly")


def theoretical_power(design: StudyDesign, effect: EffectSpec,
                      alpha: float = 0.05) -> float:
    """Two-sided score-test power: Phi(mu - z) + Phi(-mu - z).

    mu = sqrt(n * log_hr^2 * var_X * (1 - rho^2) * E[failures per subject]).
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if effect.log_hr == 0.0:
        return alpha
    d_int = _pooled_event_integral(design, effect)
    mu = math.sqrt(design.n * effect.log_hr ** 2 * effect.predictor_variance
                   * (1.0 - effect.r_squared_adjustment) * d_int)
    z = stats.norm.ppf(1.0 - alpha / 2.0)
    return float(stats.norm.cdf(mu - z) + stats.norm.cdf(-mu - z))


class InfeasibleComparisonError(ValueError):
    """A fixed-time comparison where some variance is infinite."""


def fixed_time_z_power(design_1: StudyDesign, design_2: StudyDesign, t: float,
                       alpha: float = 0.05) -> float:
    """One-sided power of Z = (S1_hat - S2_hat)/sqrt(Var1 + Var2) at time t.

    The alternative S1(t) > S2(t) is taken from the two designs' survival
    laws; variances come from the asymptotic Kaplan-Meier formula.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    v1 = CurveObjective(design_1).variance_at(t)
    v2 = CurveObjective(design_2).variance_at(t)
    if not (math.isfinite(v1) and math.isfinite(v2)):
        raise InfeasibleComparisonError(
            f"infinite variance at t={t}; the comparison is infeasible")
    gap = float(design_1.survival.sf(t)) - float(design_2.survival.sf(t))
    mu = gap / math.sqrt(v1 + v2)
    z = stats.norm.ppf(1.0 - alpha)
    return float(stats.norm.cdf(mu - z))
