"""Curvature of ``ds^2 + v(s)^2 g_{S^2}`` and field-equation residuals.

All tensors are represented in the orthonormal frame ``(d/ds, e_1, e_2)``,
where rotational symmetry leaves two independent components: the radial
one and the (repeated) tangential one.  The second derivative ``v''`` is
taken from the profile's evaluator, which for numeric profiles is the ODE
right-hand side ``G(v)``, never a finite difference.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .extension import WarpedProfile
from .tolerances import DEFAULT, Tolerances


def curvature_components(profile: WarpedProfile, s):
    """Return ``(Ric_ss, Ric_tangential, R)`` at ``s``.

    Ric_ss = -2 v''/v,  Ric_t = -v''/v + (1 - v'^2)/v^2,  R = -4 v''/v + 2 (1 - v'^2)/v^2.
    """
    v, dv, ddv = profile.geometry(s)
    ric_ss = -2.0 * ddv / v
    ric_t = -ddv / v + (1.0 - dv * dv) / (v * v)
    return ric_ss, ric_t, ric_ss + 2.0 * ric_t


@dataclass(frozen=True)
class ResidualReport:
    """Sup-norms of the field-equation defects over a grid.

    ``curl_residual`` is identically zero: ``V E`` is radial and depends on
    ``s`` alone, so it is a gradient.  It is recorded, not computed.
    """

    hessian_residual: float
    hessian_radial: float
    hessian_tangential: float
    trace_residual: float
    maxwell_residual: float
    curl_residual: float
    scalar_identity_residual: float
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def worst(self) -> float:
        return max(self.hessian_residual, self.trace_residual, self.maxwell_residual,
                   self.scalar_identity_residual)


def default_grid(profile: WarpedProfile, pole_margin: float = 1e-2) -> np.ndarray:
    """Sample points of the profile, dropping neighbourhoods of poles (``v -> 0``)."""
    s = profile.s
    keep = profile.v > pole_margin * profile.params.ell
    return s[keep]


def system_residuals(profile: WarpedProfile, grid=None) -> ResidualReport:
    """Evaluate the electrostatic (or electrovacuum) system on ``grid``.

    Components, with ``F^2 = E^2 + B^2``:

    - radial Hessian: ``V'' - V (Ric_ss - Lambda + F^2)``
    - tangential Hessian: ``(v'/v) V' - V (Ric_t - Lambda - F^2)``
    - trace: ``Delta V - (F^2 - Lambda) V`` with ``Delta V = V'' + 2 (v'/v) V'``
    - Maxwell: ``(v^2 E_r)'/v^2`` and the same for ``B_r``, by finite differences
    - scalar: ``R - 2 Lambda - 2 F^2``
    """
    s = default_grid(profile) if grid is None else np.asarray(grid, dtype=float)
    lam = profile.params.Lambda
    v, dv, _ = profile.geometry(s)
    V, dV, ddV = profile.potential(s)
    ric_ss, ric_t, R = curvature_components(profile, s)
    E = profile.params.Q / v**2
    B = profile.params.P / v**2
    F2 = E * E + B * B

    hess_ss = np.abs(ddV - V * (ric_ss - lam + F2))
    hess_tt = np.abs(dv / v * dV - V * (ric_t - lam - F2))
    lap = ddV + 2.0 * dv / v * dV
    trace = np.abs(lap - (F2 - lam) * V)
    scalar = np.abs(R - 2.0 * lam - 2.0 * F2)

    maxwell = 0.0
    if s.size >= 3 and np.all(np.diff(s) > 0):
        for field in (E, B):
            flux = v * v * field
            maxwell = max(maxwell, float(np.max(np.abs(np.gradient(flux, s) / (v * v)))))

    h_ss, h_tt = float(np.max(hess_ss)), float(np.max(hess_tt))
    return ResidualReport(
        hessian_residual=max(h_ss, h_tt),
        hessian_radial=h_ss,
        hessian_tangential=h_tt,
        trace_residual=float(np.max(trace)),
        maxwell_residual=maxwell,
        curl_residual=0.0,
        scalar_identity_residual=float(np.max(scalar)),
        n_points=int(s.size),
    )


@dataclass(frozen=True)
class SliceSurface:
    s: float
    radius: float
    area: float
    mean_curvature: float
    second_fundamental_norm: float
    gauss_curvature: float
    genus: int
    normal_orientation: int
    potential: float
    minimal: bool
    totally_geodesic: bool

    def to_dict(self) -> dict:
        return asdict(self)


def slice_geometry(profile: WarpedProfile, s: float, orientation: int = 1,
                   tol: Tolerances = DEFAULT) -> SliceSurface:
    """Geometry of the coordinate sphere ``{s} x S^2``.

    ``H = 2 v'/v`` is taken with respect to ``orientation * d/ds`` and
    ``|A|^2 = 2 (v'/v)^2``; slices with ``|H| <= tol.horizon`` are
    flagged minimal and, being umbilic, totally geodesic.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    v, dv, _ = (float(x[0]) for x in profile.geometry(np.array([s])))
    V = float(profile.potential(np.array([s]))[0][0])
    H = orientation * 2.0 * dv / v
    A2 = 2.0 * (dv / v) ** 2
    flat = abs(H) <= tol.horizon
    return SliceSurface(
        s=float(s), radius=v, area=4.0 * math.pi * v * v, mean_curvature=H,
        second_fundamental_norm=A2, gauss_curvature=1.0 / (v * v), genus=0,
        normal_orientation=orientation, potential=V, minimal=flat,
        totally_geodesic=math.sqrt(A2) <= tol.horizon,
    )
