"""Sweepout width of the doubled region and a graphical min-max probe.

The coordinate slices ``{s} x S^2``, ``s in [0, 2a]``, sweep out the doubled
region between two outer black-hole horizons.  The largest slice is the
cosmological horizon, which should carry Morse index one.  The probe
perturbs every slice of the sweepout to the graph ``s = sigma + eps h(theta)``
and checks that the perturbed sweepout maximum does not drop below the
unperturbed one beyond a cubic error band.  It samples a few competitor
families only: it is evidence for the min-max property, not a proof.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as leg
from scipy.optimize import minimize_scalar

from .errors import EmbeddingLost
from .extension import WarpedProfile
from .spectral import jacobi_spectrum
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class SweepoutEval:
    """Largest slice area of the sweepout and its comparison with the horizon.

    ``horizon_area`` is the area of the largest horizon slice of the
    profile (``4 pi r_c^2`` in the generic regime).  ``plateau`` marks a
    sweepout whose slices all have the same area, where the argmax is not
    unique and ``argmax_s`` is only a representative.
    """

    L_value: float
    argmax_s: float
    horizon_area: float
    matches_theorem_b: bool
    index_at_max: int
    plateau: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _slice_areas(profile: WarpedProfile) -> tuple[np.ndarray, np.ndarray]:
    if profile.periodic:
        lo, hi = 0.0, 2.0 * profile.half_period
        keep = (profile.s >= lo) & (profile.s <= hi)
        s = profile.s[keep]
    else:
        s = profile.s
    v = profile.radius(s)
    return s, 4.0 * math.pi * v * v


def sweepout_value(profile: WarpedProfile, rel_tol: float = 1e-9,
                   tol: Tolerances = DEFAULT) -> SweepoutEval:
    """Maximum of ``4 pi v(s)^2`` over the sweepout.

    Periodic profiles are swept over the doubled region ``[0, 2a]``; closed
    forms over their domain.  The index at the maximum comes from the
    Jacobi spectrum of the round slice of that radius.
    ``matches_theorem_b`` holds when the maximum agrees with the horizon
    area to ``rel_tol`` and that slice has index one.
    """
    s, areas = _slice_areas(profile)
    i = int(np.argmax(areas))
    L_value = float(areas[i])
    plateau = bool(np.ptp(areas) <= rel_tol * L_value)
    if profile.periodic and not plateau:
        # v is symmetric about a, where the table has a node
        argmax_s = profile.half_period
        L_value = float(4.0 * math.pi * profile.radius(np.array([argmax_s]))[0] ** 2)
    else:
        argmax_s = float(s[i])
    horizon_v = profile.radius(np.asarray(profile.horizons, dtype=float))
    horizon_area = float(4.0 * math.pi * np.max(horizon_v) ** 2)
    radius = math.sqrt(L_value / (4.0 * math.pi))
    index = jacobi_spectrum(profile.params, radius, tol=tol).index
    matches = abs(L_value - horizon_area) <= rel_tol * horizon_area and index == 1
    return SweepoutEval(L_value=L_value, argmax_s=float(argmax_s), horizon_area=horizon_area,
                        matches_theorem_b=bool(matches), index_at_max=int(index), plateau=plateau)


@dataclass(frozen=True)
class PerturbationFamily:
    """Graphs ``s = sigma + epsilon h(x)`` over the slices, ``x = cos(theta)``.

    ``h`` defaults to the Legendre polynomial of degree ``l``.  ``dh`` is
    the derivative in ``x``; it is derived from the Legendre series of
    ``h`` when not given.
    """

    epsilon: float
    l: int = 0
    h: Callable[[np.ndarray], np.ndarray] | None = None
    dh: Callable[[np.ndarray], np.ndarray] | None = None

    def functions(self):
        if self.h is None:
            coef = np.zeros(self.l + 1)
            coef[-1] = 1.0
            return (lambda x: leg.legval(x, coef)), (lambda x: leg.legval(x, leg.legder(coef)))
        if self.dh is not None:
            return self.h, self.dh
        return self.h, None


@dataclass(frozen=True)
class ProbeResult:
    """Min over families of the perturbed sweepout maximum.

    ``family_maxima`` lists ``(epsilon, l, max)`` per family.  ``holds`` is
    ``estimate >= L_value - tol_probe``, with the band taken at the largest
    sampled amplitude.
    """

    estimate: float
    L_value: float
    tol_probe: float
    holds: bool
    family_maxima: tuple[tuple[float, int, float], ...]

    @property
    def undercut(self) -> float:
        return max(0.0, self.L_value - self.estimate)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family_maxima"] = [list(x) for x in self.family_maxima]
        d["undercut"] = self.undercut
        d["note"] = "graphical axisymmetric competitors only; evidence, not proof"
        return d


def tol_probe(epsilon: float, L_value: float, ell: float, tol: Tolerances = DEFAULT) -> float:
    """Cubic error band ``C (eps/ell)^3 L`` with ``C = tol.probe``."""
    return tol.probe * (abs(epsilon) / ell) ** 3 * L_value


def _graph_samples(fam: PerturbationFamily, n_theta: int):
    x, w = leg.leggauss(n_theta)
    h, dh = fam.functions()
    hx = np.asarray(h(x), dtype=float) + np.zeros_like(x)
    if dh is None:
        # exact for polynomial h of degree below the node count
        basis = leg.legvander(x, n_theta - 1)
        coef = (basis * w[:, None]).T @ hx * (2 * np.arange(n_theta) + 1) / 2.0
        dhx = leg.legval(x, leg.legder(coef))
    else:
        dhx = np.asarray(dh(x), dtype=float) + np.zeros_like(x)
    return x, w, hx, dhx


def perturbed_area(profile: WarpedProfile, sigma: float, fam: PerturbationFamily,
                   n_theta: int = 64) -> float:
    """Area of the graph ``s = sigma + eps h`` by Gauss-Legendre quadrature in ``x = cos(theta)``.

    ``|S| = 2 pi int v(s) sqrt(v(s)^2 + eps^2 (1 - x^2) h'(x)^2) dx``.
    """
    x, w, hx, dhx = _graph_samples(fam, n_theta)
    return _area_on_graph(profile, sigma, fam.epsilon, x, w, hx, dhx)


def _area_on_graph(profile, sigma, eps, x, w, hx, dhx) -> float:
    v = profile.geometry_fn(sigma + eps * hx)[0]
    return float(2.0 * math.pi * np.sum(w * v * np.sqrt(v * v + eps**2 * (1.0 - x * x) * dhx**2)))


def _sigma_range(profile: WarpedProfile, eps: float, hx: np.ndarray) -> tuple[float, float]:
    reach = abs(eps) * float(np.max(np.abs(hx)))
    if profile.periodic:
        period = 2.0 * profile.half_period
        if abs(eps) * float(np.ptp(hx)) >= period:
            raise EmbeddingLost("graph wraps around the period of the slicing")
        return 0.0, period
    lo, hi = profile.domain
    if not hi - reach > lo + reach:
        raise EmbeddingLost(f"amplitude {reach:.3e} leaves no slice whose graph stays in the domain")
    return lo + reach, hi - reach


def _family_max(profile: WarpedProfile, fam: PerturbationFamily, n_sigma: int, n_theta: int) -> float:
    x, w, hx, dhx = _graph_samples(fam, n_theta)
    if not np.all(np.isfinite(hx)) or not np.all(np.isfinite(dhx)):
        raise ValueError("perturbation profile must be finite on [-1, 1]")
    lo, hi = _sigma_range(profile, fam.epsilon, hx)
    if not profile.periodic:
        v = profile.geometry_fn(lo + (hi - lo) * 0.5 + fam.epsilon * hx)[0]
        if np.any(v <= 0):
            raise EmbeddingLost("graph reaches a pole of the slicing")
    sig = np.linspace(lo, hi, n_sigma)
    areas = np.array([_area_on_graph(profile, t, fam.epsilon, x, w, hx, dhx) for t in sig])
    i = int(np.argmax(areas))
    best = float(areas[i])
    step = (hi - lo) / (n_sigma - 1)
    a, b = max(lo, sig[i] - step), min(hi, sig[i] + step)
    if b > a:
        res = minimize_scalar(lambda t: -_area_on_graph(profile, t, fam.epsilon, x, w, hx, dhx),
                              bounds=(a, b), method="bounded", options={"xatol": 1e-12 * (hi - lo)})
        best = max(best, -float(res.fun))
    return best


def perturbation_probe(profile: WarpedProfile, families: PerturbationFamily | Sequence[PerturbationFamily],
                       n_sigma: int = 401, n_theta: int = 64, tol: Tolerances = DEFAULT,
                       workers: int | None = None) -> ProbeResult:
    """Min over ``families`` of the maximum perturbed slice area along the sweepout.

    Each family moves every slice to the graph ``s = sigma + eps h``; the
    maximum over ``sigma`` is bracketed on an ``n_sigma`` grid and refined by
    bounded scalar optimisation.  Families are evaluated in a thread pool.

    Raises
    ------
    EmbeddingLost
        When the graphs wrap the period, leave the domain or reach a pole.
    """
    if isinstance(families, PerturbationFamily):
        families = [families]
    families = list(families)
    if not families:
        raise ValueError("at least one perturbation family is required")
    base = sweepout_value(profile, tol=tol)

    def run(fam):
        if fam.epsilon == 0.0:
            return base.L_value
        return _family_max(profile, fam, n_sigma, n_theta)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        maxima = list(pool.map(run, families))
    eps_max = max(abs(f.epsilon) for f in families)
    band = tol_probe(eps_max, base.L_value, profile.params.ell, tol)
    estimate = float(min(maxima))
    return ProbeResult(
        estimate=estimate, L_value=base.L_value, tol_probe=band,
        holds=bool(estimate >= base.L_value - band),
        family_maxima=tuple((float(f.epsilon), int(f.l), float(m)) for f, m in zip(families, maxima)),
    )
