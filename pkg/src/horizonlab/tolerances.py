"""Numerical tolerances used across the library.

Every tolerance lives in one frozen table so the CLI can override entries by
name (``--tol ode=1e-12``) and so reports can record the values they ran with.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from .errors import ConfigError

# Odd-derivative bounds for the smooth-gluing check, in units where the
# de Sitter radius sqrt(3/Lambda) is one: |v^(k)| * ell^(k-1) <= GLUE[k].
GLUE = {1: 1e-8, 2: 1e-7, 3: 1e-6, 4: 1e-5, 5: 1e-4, 6: 1e-3, 7: 1e-2}


@dataclass(frozen=True)
class Tolerances:
    root: float = 1e-12          # relative quartic residual after polishing
    regime: float = 1e-9         # distance in (Q^2 Lambda, m^2 Lambda) to a boundary curve
    coincide: float = 1e-6       # relative gap below which two roots are one
    ode: float = 1e-10           # first-integral drift target
    eig: float = 1e-9            # zero-mode band for Jacobi eigenvalues
    ineq: float = 1e-8           # relative saturation band for inequalities
    horizon: float = 1e-8        # |V| below which a slice counts as a horizon
    stationary: float = 1e-10    # |V(s0)| below which a flow start is stationary
    probe: float = 10.0          # C in tol_probe(eps) = C (eps/ell)^3 L

    def with_overrides(self, overrides: dict[str, float]) -> "Tolerances":
        known = {f.name for f in fields(self)}
        clean = {}
        for key, value in overrides.items():
            if key not in known:
                raise ConfigError(f"unknown tolerance {key!r}; expected one of {sorted(known)}")
            value = float(value)
            if not value > 0:
                raise ConfigError(f"tolerance {key} must be positive, got {value}")
            clean[key] = value
        return replace(self, **clean)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULT = Tolerances()


def tol_glue(k: int) -> float:
    """Nondimensional bound on a one-sided derivative of order ``k``."""
    if k not in GLUE:
        raise ValueError(f"smoothness order must be in 1..7, got {k}")
    return GLUE[k]
