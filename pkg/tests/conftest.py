import math

import numpy as np
import pytest
from scipy.optimize import brentq

from horizonlab import ModelParams, build_profile, cold_curve, nariai_curve

CANONICAL = ModelParams(m=0.10, Q=0.08, Lambda=3.0)
UNCHARGED = ModelParams(m=0.05, Q=0.0, Lambda=3.0)
MAGNETIC = ModelParams(m=0.10, Q=0.08, Lambda=3.0, P=0.03)
DE_SITTER = ModelParams(m=0.0, Q=0.0, Lambda=3.0)


def nariai_params(q2l=0.1, Lambda=3.0):
    return ModelParams.from_dimensionless(q2l, nariai_curve(q2l), Lambda)


def cold_params(q2l=0.1, Lambda=3.0):
    return ModelParams.from_dimensionless(q2l, cold_curve(q2l), Lambda)


def ultracold_params(Lambda=3.0):
    return ModelParams.from_dimensionless(0.25, 2.0 / 9.0, Lambda)


def bisection_roots(p: ModelParams, lo=-10.0, hi=10.0, n=200001):
    """Real roots of the lapse quartic from sign changes on a fine grid, refined by brentq."""
    r = np.linspace(lo, hi, n)
    q = p.quartic(r)
    out = []
    for i in np.nonzero(np.sign(q[:-1]) * np.sign(q[1:]) < 0)[0]:
        out.append(brentq(p.quartic, r[i], r[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200))
    for i in np.nonzero(q == 0.0)[0]:
        out.append(float(r[i]))
    return sorted(out)


@pytest.fixture(scope="session")
def canonical_profile():
    return build_profile(CANONICAL)


@pytest.fixture(scope="session")
def uncharged_profile():
    return build_profile(UNCHARGED)


@pytest.fixture(scope="session")
def magnetic_profile():
    return build_profile(MAGNETIC)


@pytest.fixture(scope="session")
def desitter_profile_fx():
    return build_profile(DE_SITTER)


@pytest.fixture(scope="session")
def nariai_profile_fx():
    return build_profile(nariai_params())


@pytest.fixture(scope="session")
def cold_profile_fx():
    return build_profile(cold_params())


@pytest.fixture(scope="session")
def ultracold_profile_fx():
    return build_profile(ultracold_params())


@pytest.fixture(scope="session")
def closed_profiles(desitter_profile_fx, nariai_profile_fx, cold_profile_fx, ultracold_profile_fx):
    return {"desitter": desitter_profile_fx, "nariai": nariai_profile_fx,
            "cold": cold_profile_fx, "ultracold": ultracold_profile_fx}


def area(v):
    return 4.0 * math.pi * v * v
