import math

import numpy as np
import pytest

from conftest import area, nariai_params
from horizonlab import build_profile, classify_regime, first_variation_residual, flow_slice, rigidity_probe

ALL = ["canonical_profile", "uncharged_profile", "magnetic_profile", "desitter_profile_fx",
       "nariai_profile_fx", "cold_profile_fx", "ultracold_profile_fx"]


def _interior_start(profile):
    if profile.periodic:
        return 0.5 * profile.half_period
    lo, hi = profile.domain
    return lo + 0.3 * (hi - lo)


@pytest.mark.parametrize("name", ALL)
def test_first_variation_residual_all_profiles(request, name):
    prof = request.getfixturevalue(name)
    st = flow_slice(prof, _interior_start(prof), T_end=20.0)
    assert not st.stationary
    assert st.first_variation_residual <= 1e-8
    assert first_variation_residual(st, prof) == st.first_variation_residual


@pytest.mark.parametrize("name", ["canonical_profile", "uncharged_profile", "nariai_profile_fx"])
def test_horizon_starts_are_stationary(request, name):
    prof = request.getfixturevalue(name)
    for h in prof.horizons:
        for s0 in (h, h + 1e-12, h - 1e-12):
            if not prof.domain[0] <= s0 <= prof.domain[1] and not prof.periodic:
                continue
            st = flow_slice(prof, s0, T_end=100.0)
            assert st.stationary and st.area_drift() <= 1e-10
            assert st.first_variation_residual == 0.0


def test_horizon_start_area_is_rc(canonical_profile):
    st = flow_slice(canonical_profile, canonical_profile.a)
    rc = float(canonical_profile.radius(np.array([canonical_profile.a]))[0])
    np.testing.assert_allclose(st.areas, area(rc), rtol=0, atol=1e-14)


def test_nariai_area_preserved(nariai_profile_fx):
    rho = classify_regime(nariai_params()).rho
    for s0 in (0.3, 1.0, 2.5):
        st = flow_slice(nariai_profile_fx, s0, T_end=100.0)
        assert np.max(np.abs(st.areas - area(rho))) <= 1e-10


def test_rnds_flow_monotone_towards_rc(canonical_profile):
    a = canonical_profile.a
    st = flow_slice(canonical_profile, 0.5 * a, T_end=100.0)
    # monotone up to rounding of the dense interpolant near the fixed point
    assert np.all(np.diff(st.s) >= -1e-12) and np.all(np.diff(st.areas) >= -1e-12)
    assert st.s[-1] - st.s[0] > 0.4 * a and np.all(st.s <= a)
    rc = float(canonical_profile.radius(np.array([a]))[0])
    assert st.areas[-1] == pytest.approx(area(rc), rel=1e-9)


def test_rnds_flow_from_other_half(canonical_profile):
    a = canonical_profile.a
    st = flow_slice(canonical_profile, 1.5 * a, T_end=100.0)
    # V < 0 on (a, 2a): the slice moves back down to the cosmological horizon
    assert np.all(np.diff(st.s) <= 1e-12) and np.all(st.s >= a)
    assert st.s[-1] == pytest.approx(a, abs=1e-6)


def test_de_sitter_analytic_trajectory(desitter_profile_fx):
    L = 1.0
    s0 = 0.1
    st = flow_slice(desitter_profile_fx, s0, T_end=2.0)
    exact = 2 * L * np.arctan(np.tan(s0 / (2 * L)) * np.exp(st.t / L))
    np.testing.assert_allclose(st.s, exact, rtol=0, atol=1e-9)


def test_de_sitter_flow_stops_at_pole(desitter_profile_fx):
    st = flow_slice(desitter_profile_fx, 0.1, T_end=100.0)
    assert st.stop_reason == "domain boundary"
    assert st.t_stop == pytest.approx(math.log(1 / math.tan(0.05)), rel=1e-6)


def test_nariai_analytic_trajectory(nariai_profile_fx):
    alpha = classify_regime(nariai_params()).alpha_or_beta
    s0 = 0.4
    st = flow_slice(nariai_profile_fx, s0, T_end=5.0)
    exact = 2 / alpha * np.arctan(np.tan(alpha * s0 / 2) * np.exp(alpha * st.t))
    np.testing.assert_allclose(st.s, exact, rtol=0, atol=1e-9)


def test_ultracold_exponential_trajectory(ultracold_profile_fx):
    st = flow_slice(ultracold_profile_fx, 0.01, T_end=3.0)
    np.testing.assert_allclose(st.s, 0.01 * np.exp(st.t), rtol=1e-9)


@pytest.mark.parametrize("name", ["canonical_profile", "uncharged_profile", "nariai_profile_fx"])
def test_no_crossing_of_horizons(request, name):
    prof = request.getfixturevalue(name)
    hs = np.array(prof.horizons)
    for frac in (0.05, 0.5, 0.95, 1.05, 1.5, 1.95):
        s0 = frac * prof.half_period
        st = flow_slice(prof, s0, T_end=200.0)
        lo, hi = hs[hs < s0].max(), hs[hs > s0].min()
        assert np.all(st.s >= lo) and np.all(st.s <= hi)
        # away from the limiting horizon V keeps the sign it started with
        V = prof.potential_fn(st.s)[0]
        moving = np.abs(V) > 1e-9
        assert np.all(np.sign(V[moving]) == np.sign(V[0]))


def test_flow_domain_errors(cold_profile_fx):
    with pytest.raises(ValueError):
        flow_slice(cold_profile_fx, 2.0)
    with pytest.raises(ValueError):
        flow_slice(cold_profile_fx, -0.1)


def test_flow_state_serialization(canonical_profile):
    st = flow_slice(canonical_profile, 0.3, T_end=1.0, n_out=11)
    d = st.to_dict(with_samples=True)
    assert len(d["samples"]) == 11 and d["s_start"] == pytest.approx(0.3)
    assert st.trajectory.shape == (11, 2)


def test_rigidity_ultracold_not_constant(ultracold_profile_fx):
    lam = ultracold_profile_fx.params.Lambda
    s = np.linspace(0.0, 1.0, 11)
    rep = rigidity_probe(ultracold_profile_fx, s)
    assert rep.D_min == pytest.approx(-(4 * lam / 3), rel=1e-12)
    assert rep.D_max == 0.0
    assert not rep.constant and rep.verdict == "relation not satisfied on this family"


def test_rigidity_reports_only(desitter_profile_fx, nariai_profile_fx, cold_profile_fx):
    for prof in (desitter_profile_fx, nariai_profile_fx, cold_profile_fx):
        rep = rigidity_probe(prof)
        assert rep.field_constancy_spread == 0.0
        assert rep.D_spread >= 0 and isinstance(rep.constant, bool)
        assert set(rep.to_dict()) >= {"D_min", "D_max", "verdict"}


def test_rigidity_nariai_spread_matches_closed_form():
    # D(s) = sin(alpha s)^3 c with c = K - Lambda/3 - 3 F^2 constant on the slice family
    for x in (0.05, 0.1, 0.2):
        p = nariai_params(x)
        rho = classify_regime(p).rho
        c = 1 / rho**2 - p.Lambda / 3 - 3 * p.charge_sq / rho**4
        rep = rigidity_probe(build_profile(p))
        assert rep.D_spread == pytest.approx(2 * abs(c), rel=1e-6)
        assert not rep.constant
