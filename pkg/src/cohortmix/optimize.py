"""Minimization of the estimation objective over the incident fraction.

K(pi) is convex on [0,1] (possibly infinite at the endpoints, legitimately
so when administrative censoring empties the risk set before tau), so a
bounded Brent search over the finite bracket plus explicit endpoint
comparison finds the global optimum. Boundary optima are reported as
all-prevalent / all-incident, matching the cases where no interior
orthogonality root exists.
"""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from scipy.optimize import minimize_scalar

from .design import StudyDesign
from .objective import CurveObjective

PI_TOL = 1e-6
_ENDPOINT_MARGIN = 1e-9

NARROW_TAU_GUIDANCE = (
    "every candidate mix leaves some positively-weighted timepoints with an "
    "expected risk set of zero, so the total variance is infinite; this "
    "usually means the assessment interval upper bound tau is too large for "
    "the given design and should be narrowed"
)


class InfeasibleDesignError(ValueError):
    """K is infinite over the entire [0,1] range of mixes."""

    def __init__(self):
        super().__init__(NARROW_TAU_GUIDANCE)


class UndefinedComparisonError(ValueError):
    """Both designs under comparison have infinite objective value."""


@dataclass(frozen=True)
class OptimizationResult:
    """Optimal incident fraction plus context for reporting."""

    pi_opt: float
    objective_value: float            # n * K at the optimum
    boundary: str                     # "interior" | "all_prevalent" | "all_incident"
    residual_at_opt: float
    are_table: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def pi_prevalent(self) -> float:
        return 1.0 - self.pi_opt

    def display_pi(self) -> str:
        return f"{self.pi_opt:.2f}"

    def to_payload(self) -> dict:
        return {
            "pi_opt": self.pi_opt,
            "pi_prevalent": self.pi_prevalent,
            "objective_value": self.objective_value,
            "boundary": self.boundary,
            "residual_at_opt": self.residual_at_opt,
            "are_table": [
                {"pi": p, "are": (a if math.isfinite(a) else "inf")}
                for p, a in self.are_table
            ],
        }


def _minimize_convex(k: Callable[[float], float]) -> Tuple[float, float]:
    """Bounded minimization of a convex, possibly endpoint-infinite function."""
    probes = [i / 16 for i in range(17)]
    values = [k(p) for p in probes]
    finite = [i for i, v in enumerate(values) if math.isfinite(v)]
    if not finite:
        raise InfeasibleDesignError()
    lo_i, hi_i = finite[0], finite[-1]
    lo = probes[lo_i] if lo_i == 0 else probes[lo_i - 1] + _ENDPOINT_MARGIN
    hi = probes[hi_i] if hi_i == 16 else probes[hi_i + 1] - _ENDPOINT_MARGIN

    def guarded(p):
        v = k(p)
        return v if math.isfinite(v) else 1e300

    res = minimize_scalar(guarded, bounds=(lo, hi), method="bounded",
                          options={"xatol": PI_TOL, "maxiter": 200})
    best_pi, best_val = float(res.x), float(res.fun)
    # endpoints always compared: the minimum of a convex function with a
    # monotone stretch sits on the boundary, which interior searches miss
    for p, v in ((0.0, values[0]), (1.0, values[-1])):
        if v < best_val:
            best_pi, best_val = p, v
    return best_pi, best_val


def _classify(pi: float) -> str:
    if pi <= PI_TOL:
        return "all_prevalent"
    if pi >= 1.0 - PI_TOL:
        return "all_incident"
    return "interior"


def optimize_curve(design: StudyDesign,
                   comparison_pis: Tuple[float, ...] = (0.5, 0.0, 1.0),
                   evaluator: Optional[CurveObjective] = None) -> OptimizationResult:
    """Minimize K(pi) over [0,1]; raises InfeasibleDesignError if K is never finite."""
    ev = evaluator or CurveObjective(design)
    pi_opt, k_opt = _minimize_convex(lambda p: ev.k(p))
    boundary = _classify(pi_opt)
    residual = ev.residual(pi_opt) if 0.0 < pi_opt < 1.0 else (
        ev.residual(max(pi_opt, 1e-9) if pi_opt < 0.5 else min(pi_opt, 1 - 1e-9)))
    table = []
    for p in comparison_pis:
        kp = ev.k(p)
        table.append((p, kp / k_opt if math.isfinite(kp) else math.inf))
    return OptimizationResult(
        pi_opt=pi_opt,
        objective_value=design.n * k_opt,
        boundary=boundary,
        residual_at_opt=residual,
        are_table=table,
    )


def optimize_fixed_time(design: StudyDesign, t: float,
                        weighted_by_tail: bool = False,
                        comparison_pis: Tuple[float, ...] = (0.5, 0.0, 1.0),
                        evaluator: Optional[CurveObjective] = None) -> OptimizationResult:
    """Minimize Var[S_hat(t); pi] at a fixed timepoint.

    With weighted_by_tail=True (t must be tau) the integrand is weighted by
    the pi-independent tail Omega(r), which makes the fixed-time problem
    equivalent to the uniform-weight curve problem.
    """
    if not (0.0 < t <= design.tau):
        raise ValueError(f"fixed timepoint must lie in (0, tau], got {t}")
    ev = evaluator or CurveObjective(design)

    if weighted_by_tail:
        if abs(t - design.tau) > 1e-12:
            raise ValueError("tail-weighted mode applies at t = tau")

        def obj(p):
            prof = ev.live_profile(p)
            if prof.t_infinity < design.tau:
                return math.inf
            omega = ev._omega
            return ev._integrate_segments(
                lambda r: ev._iota_vec(r, p) * np.asarray(omega(r)), prof.segments)
    else:
        def obj(p):
            return ev.variance_at(t, p)

    pi_opt, v_opt = _minimize_convex(obj)
    boundary = _classify(pi_opt)
    if 0.0 < pi_opt < 1.0:
        residual = ev.residual(pi_opt, mode="fixed_time", t=t)
    else:
        residual = ev.residual(min(max(pi_opt, 1e-9), 1 - 1e-9), mode="fixed_time", t=t)
    table = []
    for p in comparison_pis:
        vp = obj(p)
        table.append((p, vp / v_opt if math.isfinite(vp) else math.inf))
    return OptimizationResult(
        pi_opt=pi_opt,
        objective_value=design.n * v_opt,
        boundary=boundary,
        residual_at_opt=residual,
        are_table=table,
    )


def optimize_fixed_time_two_group(design_a: StudyDesign, design_b: StudyDesign,
                                  t: float, shared: bool = True):
    """Two-group fixed-time design: minimize Var_1 + Var_2 with a shared mix,
    or each group's variance separately."""
    if not shared:
        return optimize_fixed_time(design_a, t), optimize_fixed_time(design_b, t)
    ev_a, ev_b = CurveObjective(design_a), CurveObjective(design_b)

    def obj(p):
        return ev_a.variance_at(t, p) + ev_b.variance_at(t, p)

    pi_opt, v_opt = _minimize_convex(obj)
    return OptimizationResult(
        pi_opt=pi_opt,
        objective_value=(design_a.n + design_b.n) * v_opt / 2.0,
        boundary=_classify(pi_opt),
        residual_at_opt=(ev_a.residual(pi_opt, mode="fixed_time", t=t)
                         + ev_b.residual(pi_opt, mode="fixed_time", t=t))
        if 0.0 < pi_opt < 1.0 else 0.0,
        are_table=[],
    )


def are(design: StudyDesign, pi_a: float, pi_b: float,
        mode: str = "curve", t: Optional[float] = None,
        evaluator: Optional[CurveObjective] = None) -> float:
    """Asymptotic relative efficiency of mix pi_a against pi_b: K(pi_b)/K(pi_a).

    Values above 1 mean pi_a is the more efficient design. Fixed-time mode
    compares variances at t instead of the weighted objective.
    """
    ev = evaluator or CurveObjective(design)
    if mode == "curve":
        va, vb = ev.k(pi_a), ev.k(pi_b)
    elif mode == "fixed_time":
        if t is None:
            raise ValueError("fixed_time mode needs t")
        va, vb = ev.variance_at(t, pi_a), ev.variance_at(t, pi_b)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if math.isinf(va) and math.isinf(vb):
        raise UndefinedComparisonError(
            "both designs have infinite objective value; the comparison is undefined")
    if math.isinf(vb):
        return math.inf
    if math.isinf(va):
        return 0.0
    return vb / va
