"""Electrostatic horizon models: charged de Sitter slices, their geometry and diagnostics."""

from .errors import (ChargeBoundViolated, ChargeTooLarge, ConfigError, DegenerateRoots,
                     EmbeddingLost, EventNotFound, HorizonLabError, IndexClaimViolated,
                     NonPositiveLambda, NotAHorizonBoundary, OutOfDomain, RegimeError)
from .extension import (GluingReport, WarpedProfile, arc_length, build_profile,
                        check_smooth_gluing, cold_profile, desitter_profile,
                        half_period_quadrature, integrate_u, nariai_profile, periodic_profile,
                        profile_csv, profile_json_header, ultracold_profile)
from .flow import FlowState, RigidityReport, first_variation_residual, flow_slice, rigidity_probe
from .geometry import (ResidualReport, SliceSurface, curvature_components, default_grid,
                       slice_geometry, system_residuals)
from .inequalities import (ChargeValue, PohozaevResult, area_charge_inequality, charge,
                           charge_and_area_bounds, pohozaev_identity, slice_rigidity_flags)
from .models import (ModelParams, Regime, RegimeClass, RootProfile, admissible_grid,
                     classify_regime, cold_curve, critical_radii, horizon_roots,
                     mass_bound_check, nariai_curve)
from .reports import InequalityReport
from .spectral import (RayleighResult, SpectralReport, Stability, classify_stability,
                       horizon_index_report, jacobi_spectrum, potential_constant,
                       rayleigh_quotient)
from .tolerances import DEFAULT, GLUE, Tolerances, tol_glue
from .width import (PerturbationFamily, ProbeResult, SweepoutEval, perturbation_probe,
                    perturbed_area, sweepout_value, tol_probe)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
