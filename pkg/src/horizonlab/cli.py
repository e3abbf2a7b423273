"""Command-line front end: single-parameter reports, verification runs and grid sweeps.

Every command prints (or writes to ``--out``) a JSON document with sorted
keys, a ``"schema": "1"`` field and floats at 17 significant digits, so that
identical configurations give byte-identical output.  ``sweep``,
``extend`` and ``flow`` can emit CSV instead.

Exit status: 0 when every check run passed, 1 when a check failed, 2 on an
invalid configuration or inputs outside the supported regimes.  Errors are
reported on standard error as JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (ChargeBoundViolated, ConfigError, HorizonLabError, IndexClaimViolated,
                     NotAHorizonBoundary)
from .extension import build_profile, check_smooth_gluing, profile_csv
from .flow import flow_slice, rigidity_probe
from .geometry import system_residuals
from .inequalities import (area_charge_inequality, charge, charge_and_area_bounds,
                           pohozaev_identity, slice_rigidity_flags)
from .models import (ModelParams, Regime, admissible_grid, classify_regime, critical_radii,
                     horizon_roots, mass_bound_check)
from .spectral import horizon_index_report, jacobi_spectrum
from .tolerances import DEFAULT, Tolerances
from .width import PerturbationFamily, perturbation_probe, sweepout_value

SCHEMA = "1"
COMMANDS = ("classify", "roots", "extend", "verify", "spectrum", "inequalities", "flow",
            "width", "sweep")
SWEEP_COLUMNS = ("Q2L", "m2L", "regime", "r_minus", "r_plus", "r_c", "index_rc",
                 "index_rplus", "width", "ac_slack")

# acceptance bands used by ``verify``
CLOSED_FORM_RESIDUAL = 1e-10
NUMERIC_RESIDUAL = 1e-7
SCALAR_RESIDUAL = 1e-9
POHOZAEV_CLOSED = 1e-10
POHOZAEV_NUMERIC = 1e-6


class _Failed(Exception):
    """A verification check failed; carries the report that was produced."""

    def __init__(self, report: dict, message: str):
        super().__init__(message)
        self.report = report


# serialization -------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits, non-finite as null."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "value"):
        return dumps(obj.value)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else _fmt_float(float(x))
    return str(x)


# configuration -------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    params: ModelParams | None
    grid: dict | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    out: str | None = None
    fmt: str = "json"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if (self.grid is not None) != (self.command == "sweep"):
            raise ConfigError("a grid is required for sweep and only for sweep")
        if self.fmt not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.fmt!r}")
        if self.fmt == "csv" and self.command not in ("sweep", "extend", "flow"):
            raise ConfigError("csv output is only available for sweep, extend and flow")
        if self.command != "sweep" and self.params is None:
            raise ConfigError("model parameters are required")


def _parse_range(text: str, name: str) -> tuple[float, float, int]:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name} must look like lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    if n < 1 or not hi >= lo:
        raise ConfigError(f"{name} needs n >= 1 and hi >= lo, got {text!r}")
    return lo, hi, n


def _parse_tol(items) -> dict[str, float]:
    out = {}
    for item in items:
        key, sep, value = str(item).partition("=")
        if not sep:
            raise ConfigError(f"tolerance override must be KEY=VAL, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"tolerance {key!r} is not a number: {value!r}") from None
    return out


def read_config_file(path: str) -> dict[str, list[str]]:
    """``key=value`` lines with ``#`` comments; repeated keys accumulate."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from None
    out: dict[str, list[str]] = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key=value")
        out.setdefault(key.strip().replace("-", "_"), []).append(value.strip())
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="horizonlab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--m", type=float)
    p.add_argument("--Q", type=float)
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--P", type=float)
    p.add_argument("--q2l", type=float, help="Q^2 Lambda, instead of --Q")
    p.add_argument("--m2l", type=float, help="m^2 Lambda, instead of --m")
    p.add_argument("--grid-q2l", help="lo:hi:n")
    p.add_argument("--grid-m2l", help="lo:hi:n")
    p.add_argument("--admissible", action="store_true", default=None,
                   help="sweep the generic region; grid ranges become fractions of it")
    p.add_argument("--tol", action="append", default=None, metavar="KEY=VAL")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--config")
    p.add_argument("--s0", type=float, help="flow start (default: a/2 or mid-domain)")
    p.add_argument("--t-end", type=float, help="flow end time (default 100)")
    p.add_argument("--epsilon", type=float, help="probe amplitude for width (default 1e-2)")
    return p


_FILE_KEYS = {"m": "m", "Q": "Q", "lambda": "lambda_", "Lambda": "lambda_", "P": "P",
              "q2l": "q2l", "m2l": "m2l", "grid_q2l": "grid_q2l", "grid_m2l": "grid_m2l",
              "admissible": "admissible", "tol": "tol", "out": "out", "format": "format",
              "s0": "s0", "t_end": "t_end", "epsilon": "epsilon"}


def config_from_args(argv: list[str] | None) -> RunConfig:
    """Merge flags over an optional config file into a validated :class:`RunConfig`."""
    ns = build_parser().parse_args(argv)
    values = vars(ns)
    if ns.config:
        for key, vals in read_config_file(ns.config).items():
            if key not in _FILE_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            dest = _FILE_KEYS[key]
            if dest == "tol":
                # file entries first so that flags win
                values["tol"] = vals + (values["tol"] or [])
                continue
            if values.get(dest) is not None:
                continue
            raw = vals[-1]
            if dest in ("out", "format", "grid_q2l", "grid_m2l"):
                values[dest] = raw
            elif dest == "admissible":
                values[dest] = raw.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    values[dest] = float(raw)
                except ValueError:
                    raise ConfigError(f"config value for {key!r} is not a number: {raw!r}") from None
    tol = DEFAULT.with_overrides(_parse_tol(values["tol"] or []))
    lam = 3.0 if values["lambda_"] is None else values["lambda_"]
    if not lam > 0:
        raise ConfigError(f"Lambda must be positive, got {lam}")

    params = None
    if values["q2l"] is not None or values["m2l"] is not None:
        if values["Q"] is not None or values["m"] is not None:
            raise ConfigError("give either --m/--Q or --m2l/--q2l, not both")
        q2l = values["q2l"] or 0.0
        m2l = values["m2l"] or 0.0
        if q2l < 0 or m2l < 0:
            raise ConfigError("dimensionless parameters must be nonnegative")
        params = ModelParams.from_dimensionless(q2l, m2l, lam)
        if values["P"]:
            raise ConfigError("--P cannot be combined with --q2l")
    elif any(values[k] is not None for k in ("m", "Q", "P")) or ns.command != "sweep":
        m = values["m"] or 0.0
        if m < 0:
            raise ConfigError(f"mass must be nonnegative, got {m}")
        params = ModelParams(m=m, Q=values["Q"] or 0.0, Lambda=lam, P=values["P"] or 0.0)

    grid = None
    if ns.command == "sweep" or values["grid_q2l"] or values["grid_m2l"] or values["admissible"]:
        admissible = bool(values["admissible"])
        default = "0:1:50" if admissible else None
        gq = values["grid_q2l"] or default
        gm = values["grid_m2l"] or default
        if gq is None or gm is None:
            raise ConfigError("sweep needs --grid-q2l and --grid-m2l (or --admissible)")
        grid = {"q2l": _parse_range(gq, "--grid-q2l"), "m2l": _parse_range(gm, "--grid-m2l"),
                "admissible": admissible, "Lambda": lam}
    options = {k: values[k] for k in ("s0", "t_end", "epsilon") if values[k] is not None}
    return RunConfig(command=ns.command, params=params, grid=grid, tolerances=tol,
                     out=values["out"], fmt=values["format"] or "json", options=options)


# commands ------------------------------------------------------------------------

def _params_dict(p: ModelParams) -> dict:
    return {"m": p.m, "Q": p.Q, "Lambda": p.Lambda, "P": p.P, "q2l": p.q2l, "m2l": p.m2l}


def cmd_classify(cfg: RunConfig) -> dict:
    regime = classify_regime(cfg.params, cfg.tolerances)
    out = {"regime": regime.to_dict()}
    if 4.0 * cfg.params.q2l <= 1.0 + 4.0 * cfg.tolerances.regime:
        out["mass_bound"] = mass_bound_check(cfg.params, cfg.tolerances).to_dict()
    return out


def cmd_roots(cfg: RunConfig) -> dict:
    out = {"regime": classify_regime(cfg.params, cfg.tolerances).kind.value,
           "roots": horizon_roots(cfg.params, cfg.tolerances).to_dict()}
    if 4.0 * cfg.params.q2l <= 1.0 + 4.0 * cfg.tolerances.regime:
        rho_ss, rho_s = critical_radii(cfg.params, cfg.tolerances)
        out["critical_radii"] = {"rho_star_star": rho_ss, "rho_star": rho_s}
    return out


def cmd_extend(cfg: RunConfig):
    profile = build_profile(cfg.params, cfg.tolerances)
    if cfg.fmt == "csv":
        return profile_csv(profile)
    return {"profile": profile.header(),
            "samples": {"s": profile.s, "v": profile.v, "v_prime": profile.dv, "V": profile.V}}


def _largest_horizon(profile) -> float:
    hs = np.asarray(profile.horizons, dtype=float)
    return float(hs[int(np.argmax(profile.radius(hs)))])


def _pohozaev_region(profile):
    kind = profile.kind
    if kind in ("numeric", "nariai"):
        # the bulk integral is a genuine trapezoid quadrature here
        return (0.0, profile.half_period), POHOZAEV_NUMERIC
    if kind == "desitter":
        # Einstein metric: the bulk integrand vanishes identically
        return (0.0, profile.domain[1]), POHOZAEV_CLOSED
    return None, None


def cmd_verify(cfg: RunConfig) -> dict:
    tol = cfg.tolerances
    profile = build_profile(cfg.params, tol)
    numeric = profile.kind == "numeric"
    checks = {}

    res = system_residuals(profile)
    band = NUMERIC_RESIDUAL if numeric else CLOSED_FORM_RESIDUAL
    field_worst = max(res.hessian_residual, res.trace_residual, res.maxwell_residual)
    checks["residuals"] = {"passed": field_worst <= band, "bound": band, **res.to_dict()}
    checks["scalar_identity"] = {"passed": res.scalar_identity_residual <= SCALAR_RESIDUAL,
                                 "bound": SCALAR_RESIDUAL,
                                 "value": res.scalar_identity_residual}

    if profile.periodic and numeric:
        glue = check_smooth_gluing(profile)
        checks["smooth_gluing"] = {"passed": glue.passed, **glue.to_dict()}

    try:
        idx = horizon_index_report(cfg.params, tol)
        checks["horizon_indices"] = {"passed": True,
                                     "reports": {k: r.to_dict() for k, r in idx.items()}}
    except IndexClaimViolated as exc:
        checks["horizon_indices"] = {"passed": False, "error": str(exc)}

    s_h = _largest_horizon(profile)
    area = float(4.0 * math.pi * profile.radius(np.array([s_h]))[0] ** 2)
    q = charge(profile, s_h)
    ac = area_charge_inequality(area, q.Q_E, q.Q_B, cfg.params.Lambda,
                                geometric_flags=slice_rigidity_flags(profile, s_h, tol), tol=tol)
    checks["area_charge"] = {"passed": ac.holds, "slice_s": s_h, "area": area, **ac.to_dict()}

    region, poho_band = _pohozaev_region(profile)
    if region is not None:
        try:
            po = pohozaev_identity(profile, region, tol=tol)
            checks["pohozaev"] = {"passed": po.residual <= poho_band, "bound": poho_band,
                                  "region": list(region), **po.to_dict()}
        except NotAHorizonBoundary as exc:
            # the region ends were meant to be horizons, so this is a failed check
            checks["pohozaev"] = {"passed": False, "region": list(region), "error": str(exc)}

    passed = all(c["passed"] for c in checks.values())
    report = {"profile": profile.header(), "checks": checks, "passed": passed}
    if not passed:
        failed = sorted(k for k, c in checks.items() if not c["passed"])
        raise _Failed(report, "failed checks: " + ", ".join(failed))
    return report


def cmd_spectrum(cfg: RunConfig) -> dict:
    try:
        reports = horizon_index_report(cfg.params, cfg.tolerances)
    except IndexClaimViolated as exc:
        raise _Failed({"passed": False, "error": str(exc)}, str(exc)) from None
    return {"horizons": {k: r.to_dict() for k, r in reports.items()}}


def cmd_inequalities(cfg: RunConfig) -> dict:
    tol = cfg.tolerances
    profile = build_profile(cfg.params, tol)
    slices = []
    ok = True
    for s_h in profile.horizons:
        area = float(4.0 * math.pi * profile.radius(np.array([s_h]))[0] ** 2)
        q = charge(profile, s_h)
        ac = area_charge_inequality(area, q.Q_E, q.Q_B, cfg.params.Lambda,
                                    geometric_flags=slice_rigidity_flags(profile, s_h, tol), tol=tol)
        entry = {"s": s_h, "area": area, "charge": q.to_dict(), "area_charge": ac.to_dict()}
        ok &= ac.holds
        radius = math.sqrt(area / (4.0 * math.pi))
        if jacobi_spectrum(cfg.params, radius, tol=tol).index == 1:
            try:
                cb, (lo, hi) = charge_and_area_bounds(q.Q_E, cfg.params.Lambda, q.Q_B, tol)
                inside = lo * (1 - tol.ineq) <= area <= hi * (1 + tol.ineq)
                entry["charge_bound"] = cb.to_dict()
                entry["area_interval"] = {"lo": lo, "hi": hi, "contains_area": inside}
                ok &= inside
            except ChargeBoundViolated as exc:
                entry["charge_bound"] = {"error": str(exc)}
                ok = False
        slices.append(entry)
    out = {"slices": slices, "passed": bool(ok)}
    if 4.0 * cfg.params.q2l <= 1.0 + 4.0 * tol.regime:
        mb = mass_bound_check(cfg.params, tol)
        out["mass_bound"] = mb.to_dict()
    if not ok:
        raise _Failed(out, "an inequality or bound failed")
    return out


def cmd_flow(cfg: RunConfig) -> dict:
    profile = build_profile(cfg.params, cfg.tolerances)
    if "s0" in cfg.options:
        s0 = cfg.options["s0"]
    elif profile.periodic:
        s0 = 0.5 * profile.half_period
    else:
        s0 = 0.5 * (profile.domain[0] + profile.domain[1])
    state = flow_slice(profile, s0, T_end=cfg.options.get("t_end", 100.0), tol=cfg.tolerances)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("t", "s", "area"))
        for row in zip(state.t, state.s, state.areas):
            writer.writerow([_fmt_float(float(x)) for x in row])
        return buf.getvalue()
    return {"flow": state.to_dict(), "rigidity": rigidity_probe(profile).to_dict()}


def cmd_width(cfg: RunConfig) -> dict:
    profile = build_profile(cfg.params, cfg.tolerances)
    sw = sweepout_value(profile, tol=cfg.tolerances)
    eps = cfg.options.get("epsilon", 1e-2)
    families = [PerturbationFamily(eps, l) for l in range(5)]
    probe = perturbation_probe(profile, families, tol=cfg.tolerances)
    return {"sweepout": sw.to_dict(), "probe": probe.to_dict()}


def _sweep_cell(args) -> dict:
    q2l, m2l, lam, tol_dict = args
    tol = Tolerances(**tol_dict)
    params = ModelParams.from_dimensionless(q2l, m2l, lam)
    row = {c: None for c in SWEEP_COLUMNS}
    row.update(Q2L=q2l, m2L=m2l)
    regime = classify_regime(params, tol)
    row["regime"] = regime.kind.value
    if regime.kind == Regime.NONE:
        return row
    roots = horizon_roots(params, tol)
    row.update(r_minus=roots.r_minus, r_plus=roots.r_plus, r_c=roots.r_c)
    if roots.r_c is not None:
        row["index_rc"] = jacobi_spectrum(params, roots.r_c, tol=tol).index
        area = 4.0 * math.pi * roots.r_c**2
        row["ac_slack"] = area_charge_inequality(area, params.Q, params.P, lam, tol=tol).slack
    if roots.r_plus is not None and roots.r_plus > 0:
        row["index_rplus"] = jacobi_spectrum(params, roots.r_plus, tol=tol).index
    try:
        row["width"] = sweepout_value(build_profile(params, tol), tol=tol).L_value
    except HorizonLabError:
        pass
    return row


def _worker_count() -> int:
    raw = os.environ.get("HORIZONLAB_THREADS")
    if raw is None:
        return max(1, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"HORIZONLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"HORIZONLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def sweep_cells(grid: dict) -> list[tuple[float, float]]:
    (q_lo, q_hi, n_q), (m_lo, m_hi, n_m) = grid["q2l"], grid["m2l"]
    lam = grid["Lambda"]
    if grid["admissible"]:
        ps = admissible_grid(n_q, n_m, lam, (q_lo, q_hi), (m_lo, m_hi))
        return [(p.q2l, p.m2l) for p in ps]
    qs = np.linspace(q_lo, q_hi, n_q)
    ms = np.linspace(m_lo, m_hi, n_m)
    return [(float(x), float(y)) for x in qs for y in ms]


def cmd_sweep(cfg: RunConfig):
    cells = sweep_cells(cfg.grid)
    tol_dict = cfg.tolerances.as_dict()
    jobs = [(x, y, cfg.grid["Lambda"], tol_dict) for x, y in cells]
    workers = min(_worker_count(), max(1, len(jobs)))
    if workers == 1:
        rows = [_sweep_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    generic = [r for r in rows if r["regime"] == Regime.RNDS.value]
    failures = sum(1 for r in generic if r["index_rc"] != 1 or r["index_rplus"] != 0
                   or r["ac_slack"] is None or r["ac_slack"] < 0)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for r in rows:
            writer.writerow([_csv_cell(r[c]) for c in SWEEP_COLUMNS])
        body = buf.getvalue()
    else:
        body = {"rows": rows, "n_cells": len(rows), "n_generic": len(generic),
                "failures": failures}
    if failures:
        raise _Failed(body if isinstance(body, dict) else {"csv": body},
                      f"{failures} generic cells failed the index or area-charge check")
    return body


_DISPATCH = {"classify": cmd_classify, "roots": cmd_roots, "extend": cmd_extend,
             "verify": cmd_verify, "spectrum": cmd_spectrum, "inequalities": cmd_inequalities,
             "flow": cmd_flow, "width": cmd_width, "sweep": cmd_sweep}

# errors that mean a check ran and failed, rather than bad input
_CHECK_FAILURES = (IndexClaimViolated, ChargeBoundViolated)


def _document(cfg: RunConfig, result: dict, passed: bool) -> str:
    doc = {"schema": SCHEMA, "command": cfg.command, "passed": passed, "result": result,
           "tolerances": cfg.tolerances.as_dict()}
    if cfg.params is not None:
        doc["params"] = _params_dict(cfg.params)
    if cfg.grid is not None:
        doc["grid"] = {"q2l": list(cfg.grid["q2l"]), "m2l": list(cfg.grid["m2l"]),
                       "admissible": cfg.grid["admissible"], "Lambda": cfg.grid["Lambda"]}
    return dumps(doc) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); nothing left to report
            sys.stdout = open(os.devnull, "w")


def _error(kind: str, message: str) -> None:
    sys.stderr.write(dumps({"schema": SCHEMA, "error": kind, "message": message}) + "\n")


def run(cfg: RunConfig) -> int:
    """Execute one configuration, write its report and return the exit status."""
    try:
        result = _DISPATCH[cfg.command](cfg)
        status = 0
    except _Failed as exc:
        result, status = exc.report, 1
        _error("CheckFailed", str(exc))
    except _CHECK_FAILURES as exc:
        _error(type(exc).__name__, str(exc))
        return 1
    except (HorizonLabError, ValueError) as exc:
        _error(type(exc).__name__, str(exc))
        return 2
    if isinstance(result, str):
        _emit(cfg, result)
    elif isinstance(result, dict) and "csv" in result and len(result) == 1:
        _emit(cfg, result["csv"])
    else:
        _emit(cfg, _document(cfg, result, status == 0))
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        _error("ConfigError", str(exc))
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
