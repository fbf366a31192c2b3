"""Study design model and the theoretical at-risk / failure-rate functions.

A period-prevalent design mixes prevalent patients (entered before the
active window, left-truncated, administratively censored at entry+theta)
with incident patients (entered during the window, censored at U*theta).
CohortFunctions turns one StudyDesign into evaluable expected-risk-set and
failure-density curves over the assessment interval [0, tau].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .distributions import ConfigurationError, DistributionSpec

# Below this expected risk-set size a region counts as genuinely empty.
EPS_RISK = 1e-8

# Truncation probabilities under this are useless for sampling and estimation.
MIN_DENOMINATOR = 1e-12


class DegenerateDesignError(ValueError):
    """The design cannot produce observable prevalent patients."""


@dataclass(frozen=True)
class StudyDesign:
    """Complete configuration of a period-prevalent survival study."""

    theta: float
    tau: float
    n: int
    pi_incident: float
    survival: DistributionSpec
    arrival: DistributionSpec
    incident_entry: DistributionSpec
    weight: DistributionSpec
    dropout: Optional[DistributionSpec] = None

    def __post_init__(self):
        if not (self.theta > 0):
            raise ConfigurationError(f"theta must be positive, got {self.theta}")
        if not (self.tau > 0):
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ConfigurationError(f"n must be a positive integer, got {self.n}")
        if not (0.0 <= self.pi_incident <= 1.0):
            raise ConfigurationError(f"pi_incident must lie in [0,1], got {self.pi_incident}")
        lo, hi = self.incident_entry.support()
        if lo < -1e-12 or hi > 1 + 1e-12:
            raise ConfigurationError("incident_entry support must lie within [0,1]")
        wlo, whi = self.weight.support()
        if abs(wlo) > 1e-9 or abs(whi - self.tau) > 1e-9 * max(1.0, self.tau):
            raise ConfigurationError(
                f"weight support must be [0, tau]=[0, {self.tau}], got [{wlo}, {whi}]"
            )
        alo, _ = self.arrival.support()
        if alo < -1e-12:
            raise ConfigurationError("arrival support must be nonnegative")

    def with_pi(self, pi: float) -> "StudyDesign":
        return StudyDesign(
            theta=self.theta, tau=self.tau, n=self.n, pi_incident=float(pi),
            survival=self.survival, arrival=self.arrival,
            incident_entry=self.incident_entry, weight=self.weight,
            dropout=self.dropout,
        )


def _quad(fn, lo, hi, points=()):
    inner = sorted(p for p in points if lo < p < hi)
    val, _ = integrate.quad(fn, lo, hi, points=inner or None,
                            limit=400, epsabs=1e-12, epsrel=1e-9)
    return val


_DENOMINATOR_MEMO: dict = {}


def truncation_denominator(design: StudyDesign) -> float:
    """P(A* <= T*, A* < tau) = integral of S(t) dH(t) over [0, tau).

    For an atomic arrival law the Stieltjes integral is the survival
    probability at the atom. Memoized on (survival, arrival, tau): the
    simulator asks for it once per replication.
    """
    key = (design.survival, design.arrival, design.tau)
    hit = _DENOMINATOR_MEMO.get(key)
    if hit is not None:
        if isinstance(hit, DegenerateDesignError):
            raise hit
        return hit
    try:
        val = _truncation_denominator_impl(design)
    except DegenerateDesignError as exc:
        if len(_DENOMINATOR_MEMO) > 4096:
            _DENOMINATOR_MEMO.clear()
        _DENOMINATOR_MEMO[key] = exc
        raise
    if len(_DENOMINATOR_MEMO) > 4096:
        _DENOMINATOR_MEMO.clear()
    _DENOMINATOR_MEMO[key] = val
    return val


def _truncation_denominator_impl(design: StudyDesign) -> float:
    S = design.survival
    A = design.arrival
    if A.is_point_mass:
        a0 = A.params[0]
        val = float(S.sf(a0)) if a0 < design.tau else 0.0
    else:
        # beyond the arrival law's extreme tail the integrand is negligible;
        # clipping keeps quadrature honest when tau is effectively infinite
        hi = min(design.tau, float(A.quantile(1.0 - 1e-15)) * (1 + 1e-9) + 1e-12)
        pts = set(A.interior_breakpoints(0.0, hi))
        pts.update(S.interior_breakpoints(0.0, hi))
        val = _quad(lambda t: float(S.sf(t)) * float(A.pdf(t)), 0.0, hi, pts)
    if val < MIN_DENOMINATOR:
        raise DegenerateDesignError(
            "truncation probability is numerically zero: no prevalent patient "
            "can ever be observed under this survival/arrival combination"
        )
    return val


@dataclass(frozen=True)
class CohortFunctions:
    """Evaluable expected at-risk and failure-density curves for one design.

    All curves are per the full cohort (y_*) or per subject (d_*), with the
    dropout survival factor applied when the design has one. Immutable and
    safe for concurrent evaluation; the truncation denominator is computed
    once at construction.
    """

    design: StudyDesign
    denominator: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "denominator", truncation_denominator(self.design))

    # -- per-subject at-risk probabilities (no n, no pi) --------------------

    def at_risk_prevalent_prob(self, t):
        """P(one prevalent subject is at risk at t): S(t)(H(t)-H(t-theta))/denom."""
        t = np.asarray(t, dtype=float)
        d = self.design
        window = np.asarray(d.arrival.cdf(t)) - np.asarray(d.arrival.cdf(t - d.theta))
        out = np.asarray(d.survival.sf(t)) * window / self.denominator
        out = out * self._dropout_sf(t)
        return out if out.ndim else float(out)

    def at_risk_incident_prob(self, t):
        """P(one incident subject is at risk at t): S(t)(1-G(t/theta))."""
        t = np.asarray(t, dtype=float)
        d = self.design
        gu = np.asarray(d.incident_entry.cdf(np.minimum(t / d.theta, 1.0)))
        out = np.asarray(d.survival.sf(t)) * (1.0 - gu)
        out = out * self._dropout_sf(t)
        return out if out.ndim else float(out)

    def _dropout_sf(self, t):
        if self.design.dropout is None:
            return np.ones_like(np.asarray(t, dtype=float))
        return np.asarray(self.design.dropout.sf(t))

    # -- cohort-level risk sets ---------------------------------------------

    def y_prevalent(self, t, pi: Optional[float] = None):
        pi = self.design.pi_incident if pi is None else pi
        return self.design.n * (1.0 - pi) * self.at_risk_prevalent_prob(t)

    def y_incident(self, t, pi: Optional[float] = None):
        pi = self.design.pi_incident if pi is None else pi
        return self.design.n * pi * self.at_risk_incident_prob(t)

    def y_total(self, t, pi: Optional[float] = None):
        return self.y_prevalent(t, pi) + self.y_incident(t, pi)

    # -- per-subject failure densities ---------------------------------------

    def d_prevalent(self, t, pi: Optional[float] = None):
        """(1-pi) f(t) (H(t)-H(t-theta)) / denom, times dropout survival."""
        pi = self.design.pi_incident if pi is None else pi
        t = np.asarray(t, dtype=float)
        d = self.design
        window = np.asarray(d.arrival.cdf(t)) - np.asarray(d.arrival.cdf(t - d.theta))
        with np.errstate(invalid="ignore"):
            out = (1.0 - pi) * np.asarray(d.survival.pdf(t)) * window / self.denominator
            out = out * self._dropout_sf(t)
        # inf density times zero window at a support edge: the limit is zero
        out = np.where(np.isnan(out), 0.0, out)
        return out if out.ndim else float(out)

    def d_incident(self, t, pi: Optional[float] = None):
        """pi f(t) (1-G(t/theta)), times dropout survival."""
        pi = self.design.pi_incident if pi is None else pi
        t = np.asarray(t, dtype=float)
        d = self.design
        gu = np.asarray(d.incident_entry.cdf(np.minimum(t / d.theta, 1.0)))
        with np.errstate(invalid="ignore"):
            out = pi * np.asarray(d.survival.pdf(t)) * (1.0 - gu)
            out = out * self._dropout_sf(t)
        out = np.where(np.isnan(out), 0.0, out)
        return out if out.ndim else float(out)

    def d_total(self, t, pi: Optional[float] = None):
        return self.d_prevalent(t, pi) + self.d_incident(t, pi)

    def expected_failures(self, pi: Optional[float] = None) -> float:
        """n * integral of d_total over [0, tau]."""
        pts = self.breakpoints()
        return self.design.n * _quad(lambda t: float(self.d_total(t, pi)),
                                     0.0, self.design.tau, pts)

    # -- quadrature support ---------------------------------------------------

    def breakpoints(self) -> list[float]:
        """Interior points of [0, tau] where any curve is non-smooth.

        Includes theta (incident entry fraction saturates), distribution
        support edges, arrival atoms (risk-set steps), and the atoms shifted
        by theta (window trailing edge).
        """
        d = self.design
        pts = set()
        if d.theta < d.tau:
            pts.add(d.theta)
        for spec in (d.survival, d.arrival, d.dropout):
            if spec is None:
                continue
            pts.update(spec.interior_breakpoints(0.0, d.tau))
        # incident entry breakpoints live on the U scale; map to t = u*theta
        for u in d.incident_entry.interior_breakpoints(0.0, 1.0):
            t = u * d.theta
            if 0.0 < t < d.tau:
                pts.add(t)
        # arrival steps delayed by theta
        if d.arrival.is_point_mass:
            a0 = d.arrival.params[0]
            for x in (a0, a0 + d.theta):
                if 0.0 < x < d.tau:
                    pts.add(x)
        return sorted(pts)
