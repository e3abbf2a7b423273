"""Surface charge, area-charge inequalities and the Pohozaev-type boundary identity."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.polynomial import legendre as leg
from scipy.integrate import trapezoid

from .errors import ChargeBoundViolated, NotAHorizonBoundary
from .extension import WarpedProfile
from .geometry import curvature_components, slice_geometry
from .reports import InequalityReport, compare
from .tolerances import DEFAULT, Tolerances

RIGIDITY_FLAGS = ("TotallyGeodesic", "NormalAlignedField", "ConstantScalar", "EvenGenus")


@dataclass(frozen=True)
class ChargeValue:
    Q_E: float
    Q_B: float
    orientation: int

    def to_dict(self) -> dict:
        return asdict(self)


def charge(profile: WarpedProfile, s: float, orientation: int = 1, n: int = 32) -> ChargeValue:
    """Flux ``(1/4 pi) int <E, N> dmu`` through the slice at ``s``, by Gauss-Legendre quadrature.

    ``N = orientation * d/ds``.  The magnetic charge is the same flux of ``B``.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    v = float(profile.radius(np.array([s]))[0])
    x, w = leg.leggauss(n)
    # integrand is constant in theta and phi for radial fields
    area_weight = 2.0 * math.pi * v * v * np.sum(w * np.ones_like(x))
    E_r = profile.params.Q / v**2
    B_r = profile.params.P / v**2
    return ChargeValue(Q_E=orientation * E_r * area_weight / (4.0 * math.pi),
                       Q_B=orientation * B_r * area_weight / (4.0 * math.pi),
                       orientation=orientation)


def area_charge_inequality(area: float, Q_E: float, Q_B: float, Lambda: float, genus: int = 0,
                           geometric_flags: dict[str, bool] | None = None,
                           tol: Tolerances = DEFAULT) -> InequalityReport:
    """Check ``Lambda |S| + 16 pi^2 (Q_E^2 + Q_B^2)/|S| <= 12 pi + 8 pi (g/2 - floor(g/2))``.

    ``geometric_flags`` may mark ``TotallyGeodesic``, ``NormalAlignedField``
    and ``ConstantScalar``; ``EvenGenus`` is computed here.  Flags are kept
    only when the inequality is saturated.
    """
    if not area > 0:
        raise ValueError(f"area must be positive, got {area}")
    if genus < 0 or int(genus) != genus:
        raise ValueError(f"genus must be a nonnegative integer, got {genus}")
    lhs = Lambda * area + 16.0 * math.pi**2 * (Q_E**2 + Q_B**2) / area
    rhs = 12.0 * math.pi + 8.0 * math.pi * (genus / 2 - genus // 2)
    flags = dict(geometric_flags or {})
    flags["EvenGenus"] = genus % 2 == 0
    raised = tuple(name for name in RIGIDITY_FLAGS if flags.get(name))
    return compare("area_charge", lhs, rhs, tol.ineq, raised)


def slice_rigidity_flags(profile: WarpedProfile, s: float, tol: Tolerances = DEFAULT) -> dict[str, bool]:
    """Geometric rigidity flags of a coordinate slice.

    Radial fields are always normal to coordinate slices, and every
    rotation-invariant scalar is constant on them.
    """
    geo = slice_geometry(profile, s, tol=tol)
    return {"TotallyGeodesic": geo.totally_geodesic, "NormalAlignedField": True,
            "ConstantScalar": True}


def charge_and_area_bounds(Q_E: float, Lambda: float, Q_B: float = 0.0,
                           tol: Tolerances = DEFAULT) -> tuple[InequalityReport, tuple[float, float]]:
    """``Q^2 <= 9/(4 Lambda)`` and the area window ``(2 pi/Lambda)(3 -+ sqrt(9 - 4 Lambda Q^2))``.

    Raises
    ------
    ChargeBoundViolated
        If the charge bound fails beyond the saturation band.
    """
    q2 = Q_E**2 + Q_B**2
    bound = 9.0 / (4.0 * Lambda)
    report = compare("charge_bound", q2, bound, tol.ineq)
    if not report.holds:
        raise ChargeBoundViolated(f"Q^2 = {q2} exceeds 9/(4 Lambda) = {bound}")
    root = math.sqrt(max(0.0, 9.0 - 4.0 * Lambda * q2))
    scale = 2.0 * math.pi / Lambda
    return report, (scale * (3.0 - root), scale * (3.0 + root))


@dataclass(frozen=True)
class PohozaevResult:
    lhs: float
    rhs: float
    bulk: float
    boundary: float
    surface_gravities: tuple[float, ...]
    n_intervals: int

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["residual"] = self.residual
        return d


def _traceless_energy(profile: WarpedProfile, s: np.ndarray):
    """``|T°|^2`` and ``F^2 = |E|^2 + |B|^2`` along ``s``."""
    ric_ss, ric_t, R = curvature_components(profile, s)
    v = profile.radius(s)
    F2 = (profile.params.Q**2 + profile.params.P**2) / v**4
    t_ss = ric_ss - R / 3.0 + 4.0 / 3.0 * F2
    t_tt = ric_t - R / 3.0 - 2.0 / 3.0 * F2
    return t_ss**2 + 2.0 * t_tt**2, F2


def pohozaev_identity(profile: WarpedProfile, region: tuple[float, float],
                      n: int = 65536, tol: Tolerances = DEFAULT) -> PohozaevResult:
    """Both sides of the boundary identity on ``region = (s1, s2)``.

    ``2 pi sum k_i chi_i = int (|T°|^2 + 2/3 (Lambda - F^2) F^2) V dv + sum k_i (Lambda/3 + F^2) |S_i|``

    where ``k_i = |V'(s_i)|``, ``dv = 4 pi v^2 ds`` and the sign of ``V`` is
    fixed so that ``V >= 0`` on the region.  An endpoint where ``v``
    vanishes is a pole of the slicing and contributes no boundary term.  The
    bulk integral uses the composite trapezoid rule with ``n`` intervals.

    Raises
    ------
    NotAHorizonBoundary
        If an endpoint is neither a pole nor a zero of ``V``.
    """
    s1, s2 = map(float, region)
    if not s2 > s1:
        raise ValueError("region must satisfy s1 < s2")
    lam = profile.params.Lambda
    ell = profile.params.ell
    ends = np.array([s1, s2])
    v_end = profile.radius(ends)
    V_end, dV_end, _ = profile.potential(ends)

    ks, lhs, boundary = [], 0.0, 0.0
    for v_i, V_i, k_i in zip(v_end, V_end, np.abs(dV_end)):
        if abs(v_i) <= 1e-12 * ell:
            continue
        if abs(V_i) > tol.horizon:
            raise NotAHorizonBoundary(f"|V| = {abs(V_i):.3e} > {tol.horizon} on a boundary slice")
        F2 = (profile.params.Q**2 + profile.params.P**2) / v_i**4
        ks.append(float(k_i))
        lhs += 2.0 * math.pi * k_i * 2.0
        boundary += k_i * (lam / 3.0 + F2) * 4.0 * math.pi * v_i**2

    s = np.linspace(s1, s2, n + 1)
    V = profile.potential(s)[0]
    sign = 1.0 if np.sum(V) >= 0 else -1.0
    T2, F2 = _traceless_energy(profile, s)
    v = profile.radius(s)
    integrand = (T2 + 2.0 / 3.0 * (lam - F2) * F2) * sign * V * 4.0 * math.pi * v**2
    bulk = float(trapezoid(integrand, s))
    return PohozaevResult(lhs=float(lhs), rhs=bulk + float(boundary), bulk=bulk,
                          boundary=float(boundary), surface_gravities=tuple(ks), n_intervals=n)
