"""Periodic warped-product slice geometry ``ds^2 + v(s)^2 g_{S^2}``.

For the generic charged family the profile ``v`` is the inverse of the
arc-length function ``s(r) = int_{r_+}^r dt / V(t)``.  Rather than inverting
the singular integral, ``u = v`` is obtained from ``u'' = G(u)`` with
``u(0) = r_+, u'(0) = 0`` and stopped at the turning point ``u = r_c``.  The
half profile is then reflected across ``s = a`` and extended with period
``2a``.

The signed potential on a profile is ``V = v'``; its absolute value is the
lapse ``sqrt(V(v)^2)`` and its sign records the orientation of ``+d/ds``.
Degenerate families have closed forms with ``v`` constant (or the round
sphere for de Sitter).
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import PPoly

from .errors import EventNotFound, OutOfDomain, RegimeError
from .models import ModelParams, Regime, RegimeClass, classify_regime, horizon_roots
from .tolerances import DEFAULT, Tolerances, tol_glue

SAMPLES_PER_PERIOD = 4096
# the integrator refuses rtol below ~100 eps
_RTOL_FLOOR = 2.5e-14
# curvature sees the drift divided by v^2; budget for it relative to tol.ode
_CURVATURE_DRIFT_FACTOR = 3.0

Triple = tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True, eq=False)
class WarpedProfile:
    """A sampled slice geometry together with its exact evaluators.

    ``geometry(s)`` returns ``(v, v', v'')`` and ``potential(s)`` returns
    ``(V, V', V'')`` at arbitrary points of the domain.  The sample table
    ``(s, v, dv, V)`` is what exports and plots use.
    """

    params: ModelParams
    regime: RegimeClass
    half_period: float | None
    s: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    V: np.ndarray
    domain: tuple[float, float]
    horizons: tuple[float, ...]
    periodic: bool
    kind: str
    geometry_fn: Callable[[np.ndarray], Triple] = field(repr=False)
    potential_fn: Callable[[np.ndarray], Triple] = field(repr=False)
    drift: float = 0.0
    rtol: float | None = None

    @property
    def a(self) -> float | None:
        return self.half_period

    @property
    def samples(self) -> np.ndarray:
        """Columns ``s, v, v', V``."""
        return np.column_stack([self.s, self.v, self.dv, self.V])

    def _check(self, s: np.ndarray) -> None:
        if self.periodic:
            return
        lo, hi = self.domain
        slack = 1e-12 * max(1.0, hi - lo)
        if np.any(s < lo - slack) or np.any(s > hi + slack):
            raise OutOfDomain(f"s outside profile domain [{lo}, {hi}]")

    def geometry(self, s) -> Triple:
        s = np.asarray(s, dtype=float)
        self._check(s)
        return self.geometry_fn(s)

    def potential(self, s) -> Triple:
        s = np.asarray(s, dtype=float)
        self._check(s)
        return self.potential_fn(s)

    def radius(self, s):
        return self.geometry(s)[0]

    def E_radial(self, s):
        """Radial electric field Q / v(s)^2."""
        return self.params.Q / self.radius(s) ** 2

    def B_radial(self, s):
        """Radial magnetic field P / v(s)^2."""
        return self.params.P / self.radius(s) ** 2

    def header(self) -> dict:
        p = self.params
        return {
            "params": {"m": p.m, "Q": p.Q, "Lambda": p.Lambda, "P": p.P},
            "regime": self.regime.kind.value,
            "a": self.half_period,
            "domain": list(self.domain),
            "horizons": list(self.horizons),
            "kind": self.kind,
            "drift": self.drift,
        }


def _ode_rtol(tol: Tolerances) -> float:
    # two decades of margin: the measured drift sits ~40x above rtol
    return max(tol.ode * 1e-2, _RTOL_FLOOR)


def _require_generic(params: ModelParams, tol: Tolerances) -> RegimeClass:
    regime = classify_regime(params, tol)
    if regime.kind != Regime.RNDS:
        raise RegimeError(f"operation needs the RNdSGeneric regime, got {regime.kind.value}")
    return regime


def _desingularized(params: ModelParams, roots, lo: float, hi: float) -> float:
    """int_lo^hi dt / V(t) for r_+ <= lo < hi <= r_c, without endpoint singularities.

    Uses the factorization -p(t) = Lambda/3 (t - r_n)(t - r_-)(t - r_+)(r_c - t)
    and t = r_+ + xi^2 below the midpoint, t = r_c - eta^2 above it, so each
    piece has a smooth integrand.
    """
    lam = params.Lambda
    rp, rc = roots.r_plus, roots.r_c
    others = [r for r in roots.real_roots if r not in (rp, rc)]
    if len(others) != 2:
        others = [z.real for z in roots.roots if abs(z - rp) > 0 and abs(z - rc) > 0][:2]
    r_n, r_m = others

    def rest(t):
        return lam / 3.0 * (t - r_n) * (t - r_m)

    mid = 0.5 * (rp + rc)

    def lower(xi):
        t = rp + xi * xi
        return 2.0 * t / math.sqrt(rest(t) * (rc - t))

    def upper(eta):
        t = rc - eta * eta
        return 2.0 * t / math.sqrt(rest(t) * (t - rp))

    total = 0.0
    a, b = lo, min(hi, mid)
    if b > a:
        total += quad(lower, math.sqrt(a - rp), math.sqrt(b - rp), epsabs=0, epsrel=1e-13, limit=200)[0]
    a, b = max(lo, mid), hi
    if b > a:
        total += quad(upper, math.sqrt(rc - b), math.sqrt(max(rc - a, 0.0)), epsabs=0, epsrel=1e-13, limit=200)[0]
    return total


def arc_length(params: ModelParams, r: float, tol: Tolerances = DEFAULT) -> float:
    """Arc length s(r) from the outer black-hole horizon r_+ to radius ``r``.

    Raises
    ------
    OutOfDomain
        If ``r`` is not in ``[r_+, r_c]``.
    """
    _require_generic(params, tol)
    roots = horizon_roots(params, tol)
    if not roots.r_plus <= r <= roots.r_c:
        raise OutOfDomain(f"r = {r} outside [r_+, r_c] = [{roots.r_plus}, {roots.r_c}]")
    return _desingularized(params, roots, roots.r_plus, r)


def half_period_quadrature(params: ModelParams, tol: Tolerances = DEFAULT) -> float:
    """The half period a = s(r_c) by quadrature; independent of the ODE route."""
    _require_generic(params, tol)
    roots = horizon_roots(params, tol)
    return _desingularized(params, roots, roots.r_plus, roots.r_c)


def _hermite(params: ModelParams, s_nodes: np.ndarray, u: np.ndarray, du: np.ndarray) -> PPoly:
    """Quintic Hermite interpolant matching ``u, u'`` and ``u'' = G(u)`` at every node."""
    h = np.diff(s_nodes)
    ddu = params.G(u)
    f0, f1 = u[:-1], u[1:]
    d0, d1 = du[:-1] * h, du[1:] * h
    e0, e1 = ddu[:-1] * h * h, ddu[1:] * h * h
    df = f1 - f0
    c = np.empty((6, h.size))
    c[5] = f0
    c[4] = d0
    c[3] = 0.5 * e0
    c[2] = 10 * df - 6 * d0 - 4 * d1 - 0.5 * (3 * e0 - e1)
    c[1] = -15 * df + 8 * d0 + 7 * d1 + 0.5 * (3 * e0 - 2 * e1)
    c[0] = 6 * df - 3 * (d0 + d1) - 0.5 * (e0 - e1)
    # unit-interval coefficients to powers of (s - s_i)
    c /= h ** np.arange(5, -1, -1)[:, None]
    return PPoly(c, s_nodes)


def integrate_u(params: ModelParams, tol: Tolerances = DEFAULT,
                samples_per_period: int = SAMPLES_PER_PERIOD,
                s_max: float | None = None) -> WarpedProfile:
    """Half profile on ``[0, a]`` from ``u'' = G(u)``, ``u(0) = r_+``, ``u'(0) = 0``.

    The half period ``a`` is the first downward zero crossing of ``u'``,
    located on the dense output.  The reported ``drift`` is the largest
    value of ``|u'^2 - V(u)^2|`` on the sample grid; the relative step
    tolerance starts at ``tol.ode / 100`` and is tightened until the drift
    is below ``tol.ode`` or the integrator floor is reached.  Curvature
    quantities carry the drift divided by ``u^2``, so the loop also asks for
    ``drift (ell / u)^2 <= 3 tol.ode``; this matters for small black holes,
    where ``r_+`` is far below ``ell``.

    Raises
    ------
    EventNotFound
        If ``u'`` does not return to zero before ``s_max``.
    """
    regime = _require_generic(params, tol)
    roots = horizon_roots(params, tol)
    rp = roots.r_plus
    rtol = _ode_rtol(tol)
    s_max = 1e3 * params.ell if s_max is None else s_max

    def rhs(_s, y):
        return [y[1], params.G(y[0])]

    def turning(_s, y):
        return y[1]

    turning.terminal = True
    turning.direction = -1

    n_half = samples_per_period // 2
    while True:
        sol = solve_ivp(rhs, (0.0, s_max), [rp, 0.0], method="DOP853", rtol=rtol,
                        atol=rtol * min(rp, params.ell),
                        dense_output=True, events=turning)
        if sol.status != 1 or len(sol.t_events[0]) == 0:
            raise EventNotFound(f"u' did not vanish before s = {s_max}; check the regime")
        a = float(sol.t_events[0][0])
        s_nodes = np.linspace(0.0, a, n_half + 1)
        u, du = sol.sol(s_nodes)
        u[0], du[0] = rp, 0.0
        defect = np.abs(du**2 - params.lapse_sq(u))
        drift = float(np.max(defect))
        curv = float(np.max(defect * (params.ell / u) ** 2)) / _CURVATURE_DRIFT_FACTOR
        excess = max(drift, curv) / tol.ode
        if excess <= 1.0 or rtol <= _RTOL_FLOOR:
            break
        # drift scales roughly linearly with rtol
        rtol = max(rtol * min(0.1, 0.5 / excess), _RTOL_FLOOR)
    if drift > tol.ode:
        warnings.warn(f"first-integral drift {drift:.2e} exceeds tol_ode={tol.ode:.1e} "
                      f"at the integrator's rtol floor", RuntimeWarning, stacklevel=2)

    spline = _hermite(params, s_nodes, u, du)
    dspline = spline.derivative()

    def geometry(s):
        if np.any(s < -1e-12 * a) or np.any(s > a * (1 + 1e-12)):
            raise OutOfDomain("half profile covers [0, a] only")
        s = np.clip(s, 0.0, a)
        v = spline(s)
        return v, dspline(s), params.G(v)

    def potential(s):
        v, dv, ddv = geometry(s)
        return dv, ddv, params.dG(v) * dv

    return WarpedProfile(
        params=params, regime=regime, half_period=a, s=s_nodes, v=u, dv=du, V=du.copy(),
        domain=(0.0, a), horizons=(0.0, a), periodic=False, kind="numeric-half",
        geometry_fn=geometry, potential_fn=potential, drift=drift, rtol=rtol,
    )


def periodic_profile(half: WarpedProfile) -> WarpedProfile:
    """Reflect a half profile across ``s = a`` and extend it with period ``2a``."""
    a = half.half_period
    params = half.params
    inner = half.geometry_fn

    def fold(s):
        sp = np.mod(s, 2.0 * a)
        back = sp > a
        return np.where(back, 2.0 * a - sp, sp), np.where(back, -1.0, 1.0)

    def geometry(s):
        t, sign = fold(s)
        v, dv, ddv = inner(t)
        return v, sign * dv, ddv

    def potential(s):
        v, dv, ddv = geometry(s)
        return dv, ddv, params.dG(v) * dv

    s_half = half.s
    s_full = np.concatenate([s_half, 2.0 * a - s_half[-2::-1]])
    v_full = np.concatenate([half.v, half.v[-2::-1]])
    dv_full = np.concatenate([half.dv, -half.dv[-2::-1]])
    return WarpedProfile(
        params=params, regime=half.regime, half_period=a, s=s_full, v=v_full, dv=dv_full,
        V=dv_full.copy(), domain=(0.0, 2.0 * a), horizons=(0.0, a, 2.0 * a), periodic=True,
        kind="numeric", geometry_fn=geometry, potential_fn=potential, drift=half.drift,
        rtol=half.rtol,
    )


def _constant_radius(rho: float):
    def geometry(s):
        z = np.zeros_like(s)
        return z + rho, z, z
    return geometry


def nariai_profile(params: ModelParams, tol: Tolerances = DEFAULT,
                   n: int = SAMPLES_PER_PERIOD) -> WarpedProfile:
    """Product ``S^1 x S^2`` with ``v = rho`` and ``V = sin(alpha s)``, period ``2 pi / alpha``."""
    regime = classify_regime(params, tol)
    if regime.kind != Regime.NARIAI:
        raise RegimeError(f"expected Nariai parameters, got {regime.kind.value}")
    rho, alpha = regime.rho, regime.alpha_or_beta
    a = math.pi / alpha
    geometry = _constant_radius(rho)

    def potential(s):
        x = alpha * s
        return np.sin(x), alpha * np.cos(x), -alpha**2 * np.sin(x)

    return _closed(params, regime, a, (0.0, 2.0 * a), (0.0, a, 2.0 * a), True,
                   "nariai", geometry, potential, n)


def cold_profile(params: ModelParams, tol: Tolerances = DEFAULT,
                 n: int = SAMPLES_PER_PERIOD, length: float | None = None) -> WarpedProfile:
    """Product with ``v = rho`` and ``V = sinh(beta s)`` on ``[0, length]``."""
    regime = classify_regime(params, tol)
    if regime.kind != Regime.COLD:
        raise RegimeError(f"expected cold black hole parameters, got {regime.kind.value}")
    rho, beta = regime.rho, regime.alpha_or_beta
    length = params.ell if length is None else length
    geometry = _constant_radius(rho)

    def potential(s):
        x = beta * s
        return np.sinh(x), beta * np.cosh(x), beta**2 * np.sinh(x)

    return _closed(params, regime, None, (0.0, length), (0.0,), False,
                   "cold", geometry, potential, n)


def ultracold_profile(params: ModelParams, tol: Tolerances = DEFAULT,
                      n: int = SAMPLES_PER_PERIOD, length: float | None = None) -> WarpedProfile:
    """Product with ``v = 1/sqrt(2 Lambda)`` and ``V = s`` on ``[0, length]``."""
    regime = classify_regime(params, tol)
    if regime.kind != Regime.ULTRA_COLD:
        raise RegimeError(f"expected ultra-cold parameters, got {regime.kind.value}")
    length = params.ell if length is None else length
    geometry = _constant_radius(regime.rho)

    def potential(s):
        z = np.zeros_like(s)
        return s + z, z + 1.0, z

    return _closed(params, regime, None, (0.0, length), (0.0,), False,
                   "ultracold", geometry, potential, n)


def desitter_profile(params: ModelParams, tol: Tolerances = DEFAULT,
                     n: int = SAMPLES_PER_PERIOD) -> WarpedProfile:
    """Round sphere of radius ``L = sqrt(3/Lambda)``: ``v = L cos(s/L)``, ``V = sin(s/L)``.

    The domain runs pole to pole, ``(-pi L/2, pi L/2)``; the horizon is the
    equator ``s = 0``.
    """
    regime = classify_regime(params, tol)
    if regime.kind != Regime.DE_SITTER:
        raise RegimeError(f"expected de Sitter parameters, got {regime.kind.value}")
    L = params.ell

    def geometry(s):
        x = s / L
        return L * np.cos(x), -np.sin(x), -np.cos(x) / L

    def potential(s):
        x = s / L
        return np.sin(x), np.cos(x) / L, -np.sin(x) / L**2

    half = 0.5 * math.pi * L
    return _closed(params, regime, None, (-half, half), (0.0,), False,
                   "desitter", geometry, potential, n)


def _closed(params, regime, a, domain, horizons, periodic, kind, geometry, potential, n):
    s = np.linspace(domain[0], domain[1], n + 1)
    v, dv, _ = geometry(s)
    V = potential(s)[0]
    return WarpedProfile(
        params=params, regime=regime, half_period=a, s=s, v=v, dv=dv, V=V, domain=domain,
        horizons=horizons, periodic=periodic, kind=kind, geometry_fn=geometry,
        potential_fn=potential, drift=0.0,
    )


_BUILDERS = {
    Regime.NARIAI: nariai_profile,
    Regime.COLD: cold_profile,
    Regime.ULTRA_COLD: ultracold_profile,
    Regime.DE_SITTER: desitter_profile,
}


def build_profile(params: ModelParams, tol: Tolerances = DEFAULT) -> WarpedProfile:
    """The profile appropriate to the regime of ``params``.

    Raises
    ------
    RegimeError
        When the parameters have no physical horizon pair.
    """
    regime = classify_regime(params, tol)
    if regime.kind == Regime.RNDS:
        return periodic_profile(integrate_u(params, tol))
    if regime.kind in _BUILDERS:
        return _BUILDERS[regime.kind](params, tol)
    raise RegimeError(f"no profile for regime {regime.kind.value}")


# smooth gluing ---------------------------------------------------------------

def _one_sided_weights(k: int, npts: int) -> np.ndarray:
    """Weights on nodes 0..npts-1 (unit spacing) for the k-th derivative at 0."""
    j = np.arange(npts, dtype=float)
    A = np.vander(j, npts, increasing=True).T
    rhs = np.zeros(npts)
    rhs[k] = math.factorial(k)
    return np.linalg.solve(A, rhs)


def _one_sided_derivative(f, s0: float, k: int, h0: float, direction: int,
                          acc: int = 4, h_min: float = 0.0) -> tuple[float, float]:
    """One-sided k-th derivative of ``f`` at ``s0`` with Richardson extrapolation.

    Steps ``h0 / 2^j`` down to ``h_min`` are tried in turn.  The returned value is the
    extrapolant with the smallest change between consecutive levels, which
    balances truncation against the rounding floor.  Returns
    ``(value, error estimate)``.
    """
    npts = k + acc
    w = _one_sided_weights(k, npts)
    nodes = np.arange(npts)

    def est(step):
        return float(np.dot(w, f(s0 + direction * step * nodes))) * direction**k / step**k

    levels = max(2, int(math.log2(h0 / h_min))) if h_min > 0 else 12
    raw = [est(h0 / 2**j) for j in range(levels + 1)]
    rich = [raw[j + 1] + (raw[j + 1] - raw[j]) / (2**acc - 1) for j in range(levels)]
    best, best_err = rich[0], math.inf
    for j in range(1, levels):
        err = abs(rich[j] - rich[j - 1])
        if err < best_err:
            best, best_err = rich[j], err
    return best, best_err


def _local_refinement(params: ModelParams, s0: float, v0: float, dv0: float,
                      direction: int, width: float, rtol: float, n: int = 2048):
    """Re-integrate ``u'' = G(u)`` from the state at ``s0`` over ``width`` on one side.

    Returns an evaluator ``s -> (v, v', v'')`` on that one-sided window, read
    from the integrator's dense output, and the step floor ``width / n`` for
    finite differences.  A spline through output nodes would add
    interpolation error at stencil points between nodes, which the
    high-order differences amplify.
    """
    def rhs(_t, y):
        return [y[1], params.G(y[0])]

    sol = solve_ivp(rhs, (0.0, width), [v0, direction * dv0], method="DOP853",
                    rtol=rtol, atol=rtol * min(v0, params.ell), dense_output=True)

    def geom(s):
        t = np.clip(direction * (np.asarray(s) - s0), 0.0, width)
        u, du_t = sol.sol(t)
        return u, direction * du_t, params.G(u)

    return geom, width / n


@dataclass(frozen=True)
class GluingReport:
    entries: tuple[dict, ...]
    passed: bool
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"entries": list(self.entries), "passed": self.passed,
                "warnings": list(self.warnings)}


def check_smooth_gluing(profile: WarpedProfile, k_max: int = 5) -> GluingReport:
    """Compare one-sided derivatives of ``v`` at the gluing points ``s = 0`` and ``s = a``.

    For the reflected profile the right-hand derivative of order ``k`` is
    ``(-1)^k`` times the left-hand one, so smoothness needs every odd
    derivative to vanish.  Orders 1 to 3 come from the ODE jet (``v'``,
    ``G(v)``, ``G'(v) v'``); order ``k >= 4`` is a one-sided finite
    difference of order ``k - 3`` applied to ``G'(v) v'``.  Odd orders are
    checked against ``tol_glue(k)`` in units of ``ell = sqrt(3/Lambda)``;
    even orders report the left/right mismatch.
    """
    if not 1 <= k_max <= 7:
        raise ValueError(f"k_max must be in 1..7, got {k_max}")
    a = profile.half_period
    if a is None or not profile.periodic or profile.kind != "numeric":
        raise RegimeError("smooth gluing applies to reflected numeric profiles")
    params = profile.params
    ell = params.ell
    rtol = profile.rtol or _RTOL_FLOOR

    def third(geom):
        def w(s):
            v, dv, _ = geom(s)
            return params.dG(v) * dv
        return w

    entries = []
    notes = []
    ok = True
    for s0 in (0.0, a):
        stored = -1 if s0 > 0 else +1          # side of s0 lying in [0, a]
        v0, dv0, ddv0 = (float(x[0]) for x in profile.geometry(np.array([s0])))
        h0 = 0.25 * min(v0, a)
        # the stencil needs resolution finer than the stored table near s0
        width = (k_max + 2) * h0
        local, spacing = _local_refinement(params, s0, v0, dv0, stored, width, rtol)
        w = third(local)
        h_min = 4.0 * spacing
        for k in range(1, k_max + 1):
            if k <= 3:
                val = (dv0, ddv0, params.dG(v0) * dv0)[k - 1]
                err = 0.0
            else:
                val, err = _one_sided_derivative(w, s0, k - 3, h0, stored,
                                                 h_min=h_min)
            other = (-1) ** k * val
            left, right = (val, other) if stored < 0 else (other, val)
            scale = ell ** (k - 1)
            bound = tol_glue(k)
            value = (abs(val) if k % 2 else abs(left - right)) * scale
            passed = value <= bound
            if err * scale > bound:
                notes.append(f"order {k} at s={s0:.6g}: step floor reached, "
                             f"error estimate {err * scale:.2e}")
            ok &= passed
            entries.append({"s": s0, "order": k, "left": left, "right": right,
                            "value": value, "bound": bound, "error_estimate": err * scale,
                            "ok": passed})
    for note in notes:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    return GluingReport(tuple(entries), ok, tuple(notes))


# export --------------------------------------------------------------------------

def profile_csv(profile: WarpedProfile) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["s", "v", "v_prime", "V", "E_radial"])
    E = profile.params.Q / profile.v**2
    for row in zip(profile.s, profile.v, profile.dv, profile.V, E):
        writer.writerow([format(float(x), ".17g") for x in row])
    return buf.getvalue()


def profile_json_header(profile: WarpedProfile) -> str:
    return json.dumps(profile.header(), sort_keys=True)
