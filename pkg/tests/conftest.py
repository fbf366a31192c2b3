import numpy as np
import pytest

from cohortmix import DistributionSpec as Dist
from cohortmix import StudyDesign


@pytest.fixture(scope="session")
def baseline():
    """Exponential(10)/Exponential(10), tau=10, theta=7.5, n=1000 reference design."""
    return StudyDesign(
        theta=7.5, tau=10.0, n=1000, pi_incident=0.5,
        survival=Dist.exponential(10.0),
        arrival=Dist.exponential(10.0),
        incident_entry=Dist.uniform(0.0, 1.0),
        weight=Dist.uniform(0.0, 10.0),
    )


def make_design(theta=7.5, tau=10.0, n=1000, pi=0.5, survival=None, arrival=None,
                incident_entry=None, weight=None, dropout=None):
    return StudyDesign(
        theta=theta, tau=tau, n=n, pi_incident=pi,
        survival=survival or Dist.exponential(10.0),
        arrival=arrival or Dist.exponential(10.0),
        incident_entry=incident_entry or Dist.uniform(0.0, 1.0),
        weight=weight or Dist.uniform(0.0, tau),
        dropout=dropout,
    )


def random_design(rng: np.random.Generator, tau=10.0, n=1000):
    """A random but well-behaved design for property tests."""
    theta = float(rng.uniform(2.0, 14.0))
    surv_mean = float(rng.uniform(5.0, 20.0))
    if rng.random() < 0.5:
        survival = Dist.exponential(surv_mean)
    else:
        survival = Dist.weibull(float(rng.uniform(0.7, 1.8)), surv_mean)
    if rng.random() < 0.5:
        arrival = Dist.exponential(float(rng.uniform(4.0, 15.0)))
    else:
        arrival = Dist.weibull(float(rng.uniform(0.9, 1.6)), float(rng.uniform(4.0, 12.0)))
    if rng.random() < 0.5:
        entry = Dist.uniform(0.0, 1.0)
    else:
        entry = Dist.beta(float(rng.uniform(0.6, 3.0)), float(rng.uniform(0.6, 3.0)))
    if rng.random() < 0.5:
        weight = Dist.uniform(0.0, tau)
    else:
        weight = Dist.beta4(float(rng.uniform(1.0, 4.0)), float(rng.uniform(1.0, 4.0)),
                            0.0, tau)
    return make_design(theta=theta, tau=tau, n=n, survival=survival, arrival=arrival,
                       incident_entry=entry, weight=weight)
