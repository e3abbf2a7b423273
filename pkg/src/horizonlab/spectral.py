"""Jacobi operator of round slices and horizon Morse indices.

On the coordinate sphere of radius ``a`` the Jacobi operator is
``L = Delta + Lambda + Q^2/a^4 - 1/a^2`` whenever the sphere is a horizon,
so ``-L`` has eigenvalues ``l(l+1)/a^2 - P`` with multiplicity ``2l + 1`` and
``P = Lambda + Q^2/a^4 - 1/a^2``.  Factoring,
``P = Lambda (a^2 - rho_**^2)(a^2 - rho_*^2) / a^4``, which is where the
stability thresholds come from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as leg

from .errors import ChargeTooLarge, IndexClaimViolated, RegimeError
from .extension import WarpedProfile
from .geometry import curvature_components
from .models import ModelParams, Regime, classify_regime, horizon_roots
from .tolerances import DEFAULT, Tolerances


class Stability(str, Enum):
    UNSTABLE = "Unstable"
    STRICTLY_STABLE = "StrictlyStable"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues ``mu_l`` of ``-L`` on a round slice.

    ``modes`` holds ``(l, mu_l, 2l + 1)``; ``l_complete`` is the first degree
    with ``mu_l > tol_eig``, past which no further negative or zero modes
    can occur.
    """

    radius: float
    modes: tuple[tuple[int, float, int], ...]
    index: int
    nullity: int
    potential_constant: float
    l_complete: int
    stability: Stability

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "modes": [{"l": l, "mu": mu, "multiplicity": mult} for l, mu, mult in self.modes],
            "index": self.index,
            "nullity": self.nullity,
            "potential_constant": self.potential_constant,
            "l_complete": self.l_complete,
            "stability": self.stability.value,
        }


def potential_constant(params: ModelParams, a: float) -> float:
    """P = Lambda + Q^2/a^4 - 1/a^2, with Q^2 including any magnetic charge."""
    return params.Lambda + params.charge_sq / a**4 - 1.0 / a**2


def _stability_from_mu0(mu0: float, tol: Tolerances) -> Stability:
    if mu0 < -tol.eig:
        return Stability.UNSTABLE
    if mu0 > tol.eig:
        return Stability.STRICTLY_STABLE
    return Stability.DEGENERATE


def jacobi_spectrum(params: ModelParams, a: float, l_max: int = 10,
                    tol: Tolerances = DEFAULT) -> SpectralReport:
    """Spectrum of ``-L`` on the round slice of radius ``a``.

    Modes are listed through ``l_max``, extended if necessary until one has
    ``mu_l > tol_eig`` so the index and nullity are complete.
    """
    if not a > 0:
        raise ValueError(f"slice radius must be positive, got {a}")
    if l_max < 2:
        raise ValueError("l_max must be at least 2")
    P = potential_constant(params, a)
    modes = []
    index = nullity = 0
    l_complete = None
    l = 0
    while l <= l_max or l_complete is None:
        mu = l * (l + 1) / a**2 - P
        mult = 2 * l + 1
        modes.append((l, mu, mult))
        if mu < -tol.eig:
            index += mult
        elif mu <= tol.eig:
            nullity += mult
        elif l_complete is None:
            l_complete = l
        l += 1
    return SpectralReport(radius=float(a), modes=tuple(modes), index=index, nullity=nullity,
                          potential_constant=P, l_complete=l_complete,
                          stability=_stability_from_mu0(modes[0][1], tol))


def classify_stability(params: ModelParams, a: float, tol: Tolerances = DEFAULT) -> Stability:
    """Sign of the lowest Jacobi eigenvalue ``mu_0 = -P``.

    Unstable when ``a`` lies outside ``[rho_**, rho_*]``, strictly stable
    inside, degenerate within ``tol_eig`` of either threshold.
    """
    if 4.0 * params.q2l > 1.0 + 4.0 * tol.regime:
        raise ChargeTooLarge(f"4 Lambda Q^2 = {4 * params.q2l} > 1")
    if not a > 0:
        raise ValueError(f"slice radius must be positive, got {a}")
    return _stability_from_mu0(-potential_constant(params, a), tol)


@dataclass(frozen=True)
class RayleighResult:
    energy: float
    norm_sq: float

    @property
    def quotient(self) -> float:
        return self.energy / self.norm_sq


def rayleigh_quotient(profile: WarpedProfile, s0: float,
                      f: Callable[[np.ndarray], np.ndarray] | np.ndarray,
                      n: int = 64) -> RayleighResult:
    """Second variation ``B(f) = int |grad f|^2 - (Ric(N,N) + |A|^2) f^2`` on the slice at ``s0``.

    ``f`` is axisymmetric, given either as a callable of ``x = cos(theta)``
    or as its samples at the ``len(f)`` Gauss-Legendre nodes.  The samples
    are expanded in Legendre polynomials, so the result is exact for
    polynomial ``f`` of degree below the node count.
    """
    if callable(f):
        x, w = leg.leggauss(n)
        fx = np.asarray(f(x), dtype=float)
    else:
        fx = np.asarray(f, dtype=float)
        x, w = leg.leggauss(fx.size)
    n = x.size
    # discrete Legendre transform on the Gauss nodes
    basis = leg.legvander(x, n - 1)
    coef = (basis * w[:, None]).T @ fx * (2 * np.arange(n) + 1) / 2.0
    dfx = leg.legval(x, leg.legder(coef))

    v, dv, _ = (float(z[0]) for z in profile.geometry(np.array([s0])))
    ric_ss = float(curvature_components(profile, np.array([s0]))[0][0])
    p_eff = ric_ss + 2.0 * (dv / v) ** 2
    grad = 2.0 * math.pi * np.sum(w * (1.0 - x * x) * dfx**2)
    mass = 2.0 * math.pi * v * v * np.sum(w * fx**2)
    return RayleighResult(energy=float(grad - p_eff * mass), norm_sq=float(mass))


def horizon_index_report(params: ModelParams, tol: Tolerances = DEFAULT,
                         l_max: int = 10) -> dict[str, SpectralReport]:
    """Spectral reports of the horizon slices, keyed ``r_minus``, ``r_plus``, ``r_c``.

    In the generic regime the cosmological horizon must have index one;
    anything else raises :class:`IndexClaimViolated`.  Degenerate regimes
    report the coincident horizons once per label.
    """
    regime = classify_regime(params, tol)
    if regime.kind == Regime.NONE:
        raise RegimeError("no physical horizons for these parameters")
    roots = horizon_roots(params, tol)
    out = {}
    for label in ("r_minus", "r_plus", "r_c"):
        r = getattr(roots, label)
        if r is not None and r > 0:
            out[label] = jacobi_spectrum(params, r, l_max, tol)
    if regime.kind == Regime.RNDS:
        rc = out["r_c"]
        if rc.index != 1:
            raise IndexClaimViolated(
                f"cosmological horizon r_c = {rc.radius!r} has index {rc.index}, expected 1")
    return out
