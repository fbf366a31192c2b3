"""Parametric distribution families used to specify study inputs.

Every input curve of a period-prevalent design (survival S, prevalent
arrival H, incident entry fraction G, precision weight W, dropout) is one
of these families. Evaluation is delegated to scipy's special-function
backends (regularized incomplete beta, erf) so cdf/quantile accuracy is
limited only by double precision; sampling is inverse-CDF throughout so a
fixed random stream replays exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import special, stats


class ConfigurationError(ValueError):
    """Invalid distribution or design parameters."""


_FAMILIES = (
    "exponential",
    "weibull",
    "lognormal",
    "uniform",
    "beta",
    "beta4",
    "point_mass",
)


@dataclass(frozen=True)
class DistributionSpec:
    """One parametric family plus its parameters.

    Use the classmethod constructors; they validate parameters eagerly so
    invalid specs never reach numerical code.
    """

    family: str
    params: Tuple[float, ...]

    # -- constructors ------------------------------------------------------

    @classmethod
    def exponential(cls, mean: float) -> "DistributionSpec":
        if not (mean > 0):
            raise ConfigurationError(f"exponential mean must be positive, got {mean}")
        return cls("exponential", (float(mean),))

    @classmethod
    def weibull(cls, shape: float, scale: float) -> "DistributionSpec":
        if not (shape > 0 and scale > 0):
            raise ConfigurationError(
                f"weibull shape/scale must be positive, got ({shape}, {scale})"
            )
        return cls("weibull", (float(shape), float(scale)))

    @classmethod
    def lognormal(cls, log_mean: float, log_sd: float) -> "DistributionSpec":
        if not (log_sd > 0):
            raise ConfigurationError(f"lognormal log-sd must be positive, got {log_sd}")
        return cls("lognormal", (float(log_mean), float(log_sd)))

    @classmethod
    def uniform(cls, lower: float, upper: float) -> "DistributionSpec":
        if not (upper > lower):
            raise ConfigurationError(f"uniform needs lower < upper, got ({lower}, {upper})")
        return cls("uniform", (float(lower), float(upper)))

    @classmethod
    def beta(cls, shape1: float, shape2: float) -> "DistributionSpec":
        if not (shape1 > 0 and shape2 > 0):
            raise ConfigurationError(
                f"beta shapes must be positive, got ({shape1}, {shape2})"
            )
        return cls("beta", (float(shape1), float(shape2)))

    @classmethod
    def beta4(cls, shape1: float, shape2: float, lower: float, upper: float) -> "DistributionSpec":
        if not (shape1 > 0 and shape2 > 0):
            raise ConfigurationError(
                f"beta4 shapes must be positive, got ({shape1}, {shape2})"
            )
        if not (upper > lower):
            raise ConfigurationError(f"beta4 needs lower < upper, got ({lower}, {upper})")
        return cls("beta4", (float(shape1), float(shape2), float(lower), float(upper)))

    @classmethod
    def point_mass(cls, value: float) -> "DistributionSpec":
        if not (value >= 0):
            raise ConfigurationError(f"point mass value must be nonnegative, got {value}")
        return cls("point_mass", (float(value),))

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}")

    # -- structure ---------------------------------------------------------

    @property
    def is_point_mass(self) -> bool:
        return self.family == "point_mass"

    def support(self) -> Tuple[float, float]:
        """Closed support interval (upper may be inf)."""
        f, p = self.family, self.params
        if f in ("exponential", "weibull", "lognormal"):
            return 0.0, math.inf
        if f == "uniform":
            return p[0], p[1]
        if f == "beta":
            return 0.0, 1.0
        if f == "beta4":
            return p[2], p[3]
        return p[0], p[0]

    def interior_breakpoints(self, lo: float, hi: float) -> list[float]:
        """Points in (lo, hi) where the density or cdf is non-smooth.

        Used to force quadrature subdivision.
        """
        pts = set()
        a, b = self.support()
        for x in (a, b) + (self.params if self.is_point_mass else ()):
            if lo < x < hi and math.isfinite(x):
                pts.add(x)
        return sorted(pts)

    def _frozen(self):
        # cached: quadrature integrands evaluate specs thousands of times
        cached = self.__dict__.get("_frozen_dist")
        if cached is not None:
            return cached
        f, p = self.family, self.params
        if f == "exponential":
            dist = stats.expon(scale=p[0])
        elif f == "weibull":
            dist = stats.weibull_min(p[0], scale=p[1])
        elif f == "lognormal":
            dist = stats.lognorm(p[1], scale=math.exp(p[0]))
        elif f == "uniform":
            dist = stats.uniform(loc=p[0], scale=p[1] - p[0])
        elif f == "beta":
            dist = stats.beta(p[0], p[1])
        elif f == "beta4":
            dist = stats.beta(p[0], p[1], loc=p[2], scale=p[3] - p[2])
        else:
            raise ConfigurationError(f"no continuous backend for {f}")
        object.__setattr__(self, "_frozen_dist", dist)
        return dist

    # -- evaluation --------------------------------------------------------

    def pdf(self, x):
        """Density at x; zero outside the support.

        A point mass has no density: returns inf at the atom, 0 elsewhere.
        """
        x = np.asarray(x, dtype=float)
        if self.is_point_mass:
            out = np.where(x == self.params[0], np.inf, 0.0)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = self._frozen().pdf(x)
        return out if out.ndim else float(out)

    def cdf(self, x):
        """P(X <= x). Negative or below-support arguments return 0 exactly."""
        x = np.asarray(x, dtype=float)
        if self.is_point_mass:
            out = np.where(x >= self.params[0], 1.0, 0.0)
        else:
            out = self._frozen().cdf(x)
        return out if out.ndim else float(out)

    def sf(self, x):
        """P(X > x), computed without cancellation in the tail."""
        x = np.asarray(x, dtype=float)
        if self.is_point_mass:
            out = np.where(x >= self.params[0], 0.0, 1.0)
        else:
            out = self._frozen().sf(x)
        return out if out.ndim else float(out)

    def quantile(self, p):
        """Inverse cdf; p outside [0,1] raises.

        Closed forms (exponential, Weibull, uniform) and direct
        special-function inversions (incomplete-beta, probit) rather than
        the generic scipy ppf path: the simulator draws by inverse CDF and
        the generic path's per-call overhead dominates otherwise.
        """
        p = np.asarray(p, dtype=float)
        if np.any((p < 0) | (p > 1)):
            raise ConfigurationError("quantile argument must lie in [0, 1]")
        f, prm = self.family, self.params
        if f == "point_mass":
            out = np.full_like(p, prm[0])
        elif f == "exponential":
            out = -prm[0] * np.log1p(-p)
        elif f == "weibull":
            out = prm[1] * (-np.log1p(-p)) ** (1.0 / prm[0])
        elif f == "uniform":
            out = prm[0] + (prm[1] - prm[0]) * p
        elif f == "lognormal":
            out = np.exp(prm[0] + prm[1] * special.ndtri(p))
        elif f == "beta":
            out = special.betaincinv(prm[0], prm[1], p)
        else:  # beta4
            out = prm[2] + (prm[3] - prm[2]) * special.betaincinv(prm[0], prm[1], p)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        if self.is_point_mass:
            return self.params[0]
        return float(self._frozen().mean())

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """count independent draws by inverse-CDF from the given stream."""
        u = rng.random(count)
        if self.is_point_mass:
            return np.full(count, self.params[0])
        return np.asarray(self.quantile(u), dtype=float)

    # -- serialization -----------------------------------------------------

    def to_config(self) -> dict:
        f, p = self.family, self.params
        if f == "exponential":
            return {"family": "exponential", "mean": p[0]}
        if f == "weibull":
            return {"family": "weibull", "shape": p[0], "scale": p[1]}
        if f == "lognormal":
            return {"family": "lognormal", "log_mean": p[0], "log_sd": p[1]}
        if f == "uniform":
            return {"family": "uniform", "lower": p[0], "upper": p[1]}
        if f == "beta":
            return {"family": "beta", "shape1": p[0], "shape2": p[1]}
        if f == "beta4":
            return {"family": "beta4", "shape1": p[0], "shape2": p[1], "lower": p[2], "upper": p[3]}
        return {"family": "point_mass", "value": p[0]}

    _SCHEMA = {
        "exponential": ("mean",),
        "weibull": ("shape", "scale"),
        "lognormal": ("log_mean", "log_sd"),
        "uniform": ("lower", "upper"),
        "beta": ("shape1", "shape2"),
        "beta4": ("shape1", "shape2", "lower", "upper"),
        "point_mass": ("value",),
    }

    @classmethod
    def from_config(cls, obj: dict) -> "DistributionSpec":
        if not isinstance(obj, dict):
            raise ConfigurationError(f"distribution spec must be an object, got {obj!r}")
        fam = obj.get("family")
        if fam not in cls._SCHEMA:
            raise ConfigurationError(f"unknown distribution family {fam!r}")
        want = cls._SCHEMA[fam]
        extra = set(obj) - {"family", *want}
        if extra:
            raise ConfigurationError(f"unknown keys for {fam}: {sorted(extra)}")
        missing = [k for k in want if k not in obj]
        if missing:
            raise ConfigurationError(f"{fam} spec missing {missing}")
        args = []
        for k in want:
            v = obj[k]
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ConfigurationError(f"{fam}.{k} must be a finite number, got {v!r}")
            args.append(float(v))
        ctor = {
            "exponential": cls.exponential,
            "weibull": cls.weibull,
            "lognormal": cls.lognormal,
            "uniform": cls.uniform,
            "beta": cls.beta,
            "beta4": cls.beta4,
            "point_mass": cls.point_mass,
        }[fam]
        return ctor(*args)
