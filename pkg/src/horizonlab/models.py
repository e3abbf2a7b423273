"""Model parameters, lapse-quartic roots and regime classification.

The lapse of the charged Schwarzschild-de Sitter family is

    V(r)^2 = 1 - 2m/r + Q^2/r^2 - Lambda r^2 / 3,

whose zeros are the roots of ``Lambda/3 r^4 - r^2 + 2 m r - Q^2``.  With a
magnetic charge ``P`` the lapse only sees ``Q^2 + P^2``; every radius below is
computed from that combination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ChargeTooLarge, DegenerateRoots, NonPositiveLambda
from .reports import InequalityReport, compare
from .tolerances import DEFAULT, Tolerances

ULTRA_COLD_Q2L = 0.25
ULTRA_COLD_M2L = 2.0 / 9.0


class Regime(str, Enum):
    DE_SITTER = "DeSitter"
    RNDS = "RNdSGeneric"
    NARIAI = "Nariai"
    COLD = "ColdBlackHole"
    ULTRA_COLD = "UltraCold"
    NONE = "NoPhysicalHorizon"


@dataclass(frozen=True)
class ModelParams:
    """Mass ``m``, electric charge ``Q``, cosmological constant ``Lambda`` and magnetic charge ``P``."""

    m: float
    Q: float
    Lambda: float
    P: float = 0.0

    def __post_init__(self):
        if not self.m >= 0:
            raise ValueError(f"mass parameter must be nonnegative, got {self.m}")

    @classmethod
    def from_dimensionless(cls, q2l: float, m2l: float, Lambda: float = 3.0) -> "ModelParams":
        """Parameters with ``Q^2 Lambda = q2l`` and ``m^2 Lambda = m2l`` (``Q, m >= 0``)."""
        return cls(m=math.sqrt(m2l / Lambda), Q=math.sqrt(q2l / Lambda), Lambda=Lambda)

    @property
    def charge_sq(self) -> float:
        return self.Q * self.Q + self.P * self.P

    @property
    def q2l(self) -> float:
        return self.charge_sq * self.Lambda

    @property
    def m2l(self) -> float:
        return self.m * self.m * self.Lambda

    @property
    def ell(self) -> float:
        """de Sitter radius sqrt(3/Lambda); the natural length unit."""
        return math.sqrt(3.0 / self.Lambda)

    def quartic(self, r):
        return self.Lambda / 3.0 * r**4 - r**2 + 2.0 * self.m * r - self.charge_sq

    def quartic_prime(self, r):
        return 4.0 * self.Lambda / 3.0 * r**3 - 2.0 * r + 2.0 * self.m

    def lapse_sq(self, r):
        """V(r)^2 = 1 - 2m/r + (Q^2 + P^2)/r^2 - Lambda r^2/3."""
        return 1.0 - 2.0 * self.m / r + self.charge_sq / r**2 - self.Lambda * r**2 / 3.0

    def G(self, r):
        """Right-hand side of u'' = G(u); equals half the r-derivative of V^2."""
        return self.m / r**2 - self.charge_sq / r**3 - self.Lambda * r / 3.0

    def dG(self, r):
        return -2.0 * self.m / r**3 + 3.0 * self.charge_sq / r**4 - self.Lambda / 3.0


@dataclass(frozen=True)
class RootProfile:
    roots: tuple[complex, ...]
    real_roots: tuple[float, ...]
    positive_roots: tuple[float, ...]
    negative_root: float | None
    r_minus: float | None
    r_plus: float | None
    r_c: float | None
    rho_star: float | None
    rho_star_star: float | None
    residuals: tuple[float, ...]
    vieta_residual: float
    degenerate: Regime | None = None

    def to_dict(self) -> dict:
        return {
            "roots": [[z.real, z.imag] for z in self.roots],
            "real_roots": list(self.real_roots),
            "positive_roots": list(self.positive_roots),
            "negative_root": self.negative_root,
            "r_minus": self.r_minus,
            "r_plus": self.r_plus,
            "r_c": self.r_c,
            "rho_star": self.rho_star,
            "rho_star_star": self.rho_star_star,
            "residuals": list(self.residuals),
            "vieta_residual": self.vieta_residual,
            "degenerate": self.degenerate.value if self.degenerate else None,
        }


@dataclass(frozen=True)
class RegimeClass:
    kind: Regime
    rho: float | None = None
    alpha_or_beta: float | None = None
    q2l: float = 0.0
    m2l: float = 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "rho": self.rho,
                "alpha_or_beta": self.alpha_or_beta, "q2l": self.q2l, "m2l": self.m2l}


def _require_lambda(params: ModelParams) -> None:
    if not params.Lambda > 0:
        raise NonPositiveLambda(f"Lambda must be positive, got {params.Lambda}")


def nariai_curve(q2l: float) -> float:
    """m^2 Lambda on the upper double-root curve (r_+ = r_c), for 0 <= q2l <= 1/4."""
    w = math.sqrt(max(0.0, 1.0 - 4.0 * q2l))
    return (1.0 + 12.0 * q2l + w**3) / 18.0


def cold_curve(q2l: float) -> float:
    """m^2 Lambda on the lower double-root curve (r_- = r_+), for 0 <= q2l <= 1/4."""
    w = math.sqrt(max(0.0, 1.0 - 4.0 * q2l))
    return (1.0 + 12.0 * q2l - w**3) / 18.0


def _relative_residual(params: ModelParams, r: float) -> float:
    scale = (params.Lambda / 3.0 * r**4 + r * r + 2.0 * params.m * abs(r) + params.charge_sq)
    return abs(params.quartic(r)) / scale if scale > 0 else 0.0


def _polish(params: ModelParams, r: float, iters: int = 12) -> float:
    """Newton refinement of a real root; stops once the step stalls."""
    for _ in range(iters):
        dp = params.quartic_prime(r)
        if dp == 0.0:
            break
        step = params.quartic(r) / dp
        r_new = r - step
        if not math.isfinite(r_new) or abs(params.quartic(r_new)) > abs(params.quartic(r)):
            break
        r = r_new
        if abs(step) <= 4e-16 * max(abs(r), 1e-300):
            break
    return r


def _eigen_roots(params: ModelParams) -> np.ndarray:
    lam, m, q2 = params.Lambda, params.m, params.charge_sq
    if q2 == 0.0:
        # r = 0 factors out exactly; the cubic carries the rest
        if m == 0.0:
            ell = params.ell
            return np.array([-ell, 0.0, 0.0, ell], dtype=complex)
        rest = np.roots([lam / 3.0, 0.0, -1.0, 2.0 * m])
        return np.concatenate([[0.0], rest]).astype(complex)
    return np.roots([lam / 3.0, 0.0, -1.0, 2.0 * m, -q2]).astype(complex)


def _real_candidates(params: ModelParams, roots: np.ndarray, tol: Tolerances) -> list[float]:
    reals = []
    for z in roots:
        if abs(z.imag) <= tol.coincide * max(abs(z), 1e-3 * params.ell):
            x = float(z.real)
            reals.append(0.0 if x == 0.0 else _polish(params, x))
    return sorted(reals)


def _boundary_regime(params: ModelParams, tol: Tolerances) -> RegimeClass | None:
    """Classify against the measure-zero curves of the parameter diagram."""
    x, y, lam = params.q2l, params.m2l, params.Lambda
    if abs(x - ULTRA_COLD_Q2L) <= tol.regime and abs(y - ULTRA_COLD_M2L) <= tol.regime:
        return RegimeClass(Regime.ULTRA_COLD, 1.0 / math.sqrt(2.0 * lam), 0.0, x, y)
    if x <= tol.regime and y <= tol.regime:
        return RegimeClass(Regime.DE_SITTER, None, None, x, y)
    if x > ULTRA_COLD_Q2L:
        return None
    w = math.sqrt(max(0.0, 1.0 - 4.0 * x))
    if abs(y - nariai_curve(x)) <= tol.regime:
        rho = math.sqrt((1.0 + w) / (2.0 * lam))
        alpha = math.sqrt(max(0.0, lam - params.charge_sq / rho**4))
        return RegimeClass(Regime.NARIAI, rho, alpha, x, y)
    if x > tol.regime and abs(y - cold_curve(x)) <= tol.regime:
        rho = math.sqrt(2.0 * params.charge_sq / (1.0 + w))
        beta = math.sqrt(max(0.0, params.charge_sq / rho**4 - lam))
        return RegimeClass(Regime.COLD, rho, beta, x, y)
    return None


def _snap_degenerate(params: ModelParams, regime: RegimeClass) -> list[float]:
    """All four real roots of a parameter point on a double-root curve."""
    lam = params.Lambda
    if regime.kind == Regime.ULTRA_COLD:
        rho = regime.rho
        return [-3.0 * rho, rho, rho, rho]
    rho = regime.rho
    other = _polish(params, math.sqrt(max(0.0, 3.0 / lam - 2.0 * rho * rho)) - rho)
    negative = _polish(params, -2.0 * rho - other)
    return sorted([negative, other, rho, rho])


def critical_radii(params: ModelParams, tol: Tolerances = DEFAULT) -> tuple[float, float]:
    """Return ``(rho_**, rho_*)``, the radii where Lambda a^4 - a^2 + Q^2 vanishes.

    Raises
    ------
    ChargeTooLarge
        If ``4 Lambda Q^2 > 1``.
    """
    _require_lambda(params)
    x = params.q2l
    if 4.0 * x > 1.0 + 4.0 * tol.regime:
        raise ChargeTooLarge(f"4 Lambda Q^2 = {4 * x} > 1")
    w = math.sqrt(max(0.0, 1.0 - 4.0 * x))
    lam = params.Lambda
    # conjugate form avoids cancellation for small charge
    rho_ss = math.sqrt(2.0 * params.charge_sq / (1.0 + w))
    rho_s = math.sqrt((1.0 + w) / (2.0 * lam))
    return rho_ss, rho_s


def horizon_roots(params: ModelParams, tol: Tolerances = DEFAULT) -> RootProfile:
    """All four roots of the lapse quartic, with positive roots labeled.

    Roots come from companion-matrix eigenvalues and are Newton-polished.  On
    the Nariai, cold and ultra-cold curves the multiple roots are taken from
    their closed forms instead.  Nonzero coincident roots off those curves
    raise :class:`DegenerateRoots`.
    """
    _require_lambda(params)
    boundary = _boundary_regime(params, tol)
    raw = _eigen_roots(params)
    degenerate = None
    if boundary is not None and boundary.kind != Regime.DE_SITTER:
        reals = _snap_degenerate(params, boundary)
        roots = np.array(reals, dtype=complex)
        degenerate = boundary.kind
    else:
        reals = _real_candidates(params, raw, tol)
        for lo, hi in zip(reals, reals[1:]):
            if lo != 0.0 and hi - lo <= tol.coincide * max(abs(lo), abs(hi)):
                raise DegenerateRoots(
                    f"roots {lo!r} and {hi!r} coincide; consult classify_regime "
                    f"(q2l={params.q2l!r}, m2l={params.m2l!r})")
        complex_part = [z for z in raw
                        if abs(z.imag) > tol.coincide * max(abs(z), 1e-3 * params.ell)]
        roots = np.array(reals + complex_part, dtype=complex)

    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    positive = sorted({r for r in reals if r > 0.0})
    negatives = [r for r in reals if r < 0.0]
    negative_root = negatives[0] if len(negatives) == 1 and len(reals) == 4 else None

    r_minus = r_plus = r_c = None
    if degenerate == Regime.ULTRA_COLD:
        r_minus = r_plus = r_c = positive[0]
    elif degenerate == Regime.NARIAI:
        rho = boundary.rho
        r_plus = r_c = rho
        below = [r for r in positive if r < rho]
        r_minus = below[0] if below else None
    elif degenerate == Regime.COLD:
        rho = boundary.rho
        r_minus = r_plus = rho
        above = [r for r in positive if r > rho]
        r_c = above[0] if above else None
    elif len(positive) == 3:
        r_minus, r_plus, r_c = positive
    elif len(positive) == 2:
        # r = 0 is the inner root when Q = 0; it carries no horizon label
        r_plus, r_c = positive
    elif len(positive) == 1:
        r_c = positive[0]

    try:
        rho_ss, rho_s = critical_radii(params, tol)
    except ChargeTooLarge:
        rho_ss = rho_s = None

    return RootProfile(
        roots=tuple(complex(z) for z in roots),
        real_roots=tuple(float(r) for r in reals),
        positive_roots=tuple(positive),
        negative_root=negative_root,
        r_minus=r_minus,
        r_plus=r_plus,
        r_c=r_c,
        rho_star=rho_s,
        rho_star_star=rho_ss,
        residuals=tuple(_relative_residual(params, r) for r in reals),
        vieta_residual=float(abs(np.sum(roots))),
        degenerate=degenerate,
    )


def classify_regime(params: ModelParams, tol: Tolerances = DEFAULT) -> RegimeClass:
    """Place ``params`` in the (Q^2 Lambda, m^2 Lambda) diagram.

    Boundary curves win over open regions.  Off the curves, the generic
    family needs the black-hole and cosmological horizons as distinct simple
    positive roots (three of them, or two plus r = 0 when the charge vanishes);
    anything else has no physical horizon pair.
    """
    _require_lambda(params)
    boundary = _boundary_regime(params, tol)
    if boundary is not None:
        return boundary
    x, y = params.q2l, params.m2l
    if x > ULTRA_COLD_Q2L:
        return RegimeClass(Regime.NONE, q2l=x, m2l=y)
    try:
        roots = horizon_roots(params, tol)
    except DegenerateRoots:
        return RegimeClass(Regime.NONE, q2l=x, m2l=y)
    n_pos = len(roots.positive_roots)
    if n_pos == 3 or (params.charge_sq == 0.0 and n_pos == 2):
        return RegimeClass(Regime.RNDS, q2l=x, m2l=y)
    return RegimeClass(Regime.NONE, q2l=x, m2l=y)


def mass_bound_check(params: ModelParams, tol: Tolerances = DEFAULT) -> InequalityReport:
    """m^2 <= [1 + 12 Q^2 Lambda + (1 - 4 Q^2 Lambda)^(3/2)] / (18 Lambda)."""
    _require_lambda(params)
    x = params.q2l
    if 4.0 * x > 1.0 + 4.0 * tol.regime:
        raise ChargeTooLarge(f"4 Lambda Q^2 = {4 * x} > 1")
    w = math.sqrt(max(0.0, 1.0 - 4.0 * x))
    rhs = (1.0 + 12.0 * x + w**3) / (18.0 * params.Lambda)
    return compare("mass_bound", params.m**2, rhs, tol.ineq)


def admissible_grid(n_q: int = 50, n_m: int = 50, Lambda: float = 3.0,
                    q_range: tuple[float, float] = (0.0, 1.0),
                    m_range: tuple[float, float] = (0.0, 1.0)) -> list[ModelParams]:
    """Cell-centred grid strictly inside the generic region.

    ``q_range`` is a fraction of (0, 1/4) in Q^2 Lambda; ``m_range`` is a
    fraction of the window between the cold and Nariai curves at each charge.
    """
    out = []
    q_lo, q_hi = q_range
    m_lo, m_hi = m_range
    for i in range(n_q):
        x = ULTRA_COLD_Q2L * (q_lo + (q_hi - q_lo) * (i + 0.5) / n_q)
        lo, hi = cold_curve(x), nariai_curve(x)
        for j in range(n_m):
            t = m_lo + (m_hi - m_lo) * (j + 0.5) / n_m
            out.append(ModelParams.from_dimensionless(x, lo + t * (hi - lo), Lambda))
    return out
