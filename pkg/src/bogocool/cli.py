"""Command-line entry point: ``bogocool <mode> --config <path>``.

Each mode produces one or more tables; tables are written as CSV and/or JSON
with a fixed column order, next to a manifest recording the config, derived
quantities, version and timing. Data files hold no timestamps, so identical
configs give byte-identical tables.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import MODES, ConfigError, RunConfig, load_config
from .dynamics import (
    FITTED_ALPHA_SUPERSONIC,
    Method,
    PopulationState,
    ProbabilityDriftError,
    boltzmann_populations,
    energy_dissipation_profile,
    evolve,
)
from .numerics import LaguerreRangeError, QuadratureError, fit_power_law
from .onedim import (
    OneDimParams,
    check_validity,
    damping_constant_1d,
    luttinger_parameters,
    rate_constant_1d,
)
from .physical_system import HBAR, KB, InvalidParameterError, Regime, RegimeError, derive
from .rates import RateMode, build_rate_matrix, subsonic_prefactor, supersonic_prefactor, transition_rate
from .semiclassical import (
    amplitude_parameter,
    constant_C,
    edot_semiclassical_subsonic,
    n_cutoff,
    semiclassical_quantum_ratio,
    spectrum,
    term_comparison,
)

log = logging.getLogger("bogocool")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_REGIME = 0, 2, 3, 4


@dataclass
class Table:
    name: str
    columns: list
    rows: list


class OutputValidationError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# Modes
# --------------------------------------------------------------------------

def _derived_dict(cfg: RunConfig) -> dict:
    d = derive(cfg.system_params())
    out = {k: v for k, v in asdict(d).items() if k not in ("hbar", "kB")}
    out["regime"] = d.regime.value
    out["theta"] = d.to_internal().temperature
    out["l0_omega_over_u"] = d.l0 * d.omega / d.u
    return out


def _rate_matrix(cfg: RunConfig):
    return build_rate_matrix(cfg.n_max, cfg.system_params(), RateMode(cfg.rate_mode), cfg.quad_rel_tol)


def mode_rates(cfg: RunConfig):
    R = _rate_matrix(cfg)
    dim = R.dimensionless("auto")
    rows = [[n, m, float(R.F[n, m]), float(dim[n, m]), float(R.H[n, m])]
            for n in range(1, R.size) for m in range(n)]
    norm = "subsonic" if R.regime_used == RateMode.SUBSONIC else "supersonic"
    return ([Table("rates", ["n", "m", "F_per_omega", "F_dimensionless", "H_per_omega"], rows)],
            {"rate_mode_used": R.regime_used.value, "dimensionless_normalisation": norm})


def _fit_rows(x, y, ranges, exponents):
    rows = []
    for lo, hi in ranges:
        pts = [(n, y[n]) for n in x if lo <= n <= hi and y[n] > 0]
        if len(pts) < 3:
            continue
        for e in exponents:
            f = fit_power_law(pts, fixed_exponent=e)
            rows.append(["free" if e is None else "fixed", lo, hi, f.prefactor, f.exponent, f.residual_rms])
    return rows


def mode_dissipation(cfg: RunConfig):
    R = _rate_matrix(cfg)
    ed = energy_dissipation_profile(R)
    subsonic = R.regime_used == RateMode.SUBSONIC
    scale = R.subsonic_scale if subsonic else R.supersonic_scale
    dimless = -ed / scale + 0.0  # no negative zeros in the tables
    params = cfg.system_params()
    closed = [None] * R.size
    if derive(params).regime == Regime.SUBSONIC:
        closed = [edot_semiclassical_subsonic(n, params) for n in range(R.size)]
    rows = [[n, float(ed[n]), float(dimless[n]), None if closed[n] is None else float(closed[n])]
            for n in range(R.size)]
    ns = range(1, R.size)
    if subsonic:
        fits = _fit_rows(ns, dimless, [(1, cfg.n_max)], [1.0, None])
    else:
        fits = _fit_rows(ns, dimless, [(1, cfg.n_max), (5, cfg.n_max)], [1.5, None])
    extra = {"rate_mode_used": R.regime_used.value,
             "dimensionless_normalisation": "subsonic" if subsonic else "supersonic"}
    if subsonic:
        d = derive(params).to_internal()
        extra["closed_form_alpha"] = 1.0 / (3.0 * d.u ** 2)
    return ([Table("dissipation", ["n", "edot_hbar_omega2", "minus_edot_dimensionless",
                                   "edot_closed_form_hbar_omega2"], rows),
             Table("fits", ["kind", "n_lo", "n_hi", "prefactor", "exponent", "residual_rms"], fits)],
            extra)


def mode_evolve(cfg: RunConfig):
    R = _rate_matrix(cfg)
    p0 = PopulationState.fock(cfg.initial_level, cfg.n_max)
    grid = cfg.time.grid()
    traj = evolve(p0, R, grid, Method(cfg.method), drift_limit=cfg.drift_limit)
    cols = ["t_cycles"] + [f"p_{n}" for n in range(R.size)] + ["energy_hbar_omega"]
    rows = [[float(t)] + [float(v) for v in p] + [float(e)]
            for t, p, e in zip(traj.times, traj.populations, traj.energy)]
    return [Table("trajectory", cols, rows)], {"method": traj.method.value}


def mode_equilibrium(cfg: RunConfig):
    omega = cfg.system["omega"]
    theta = KB * cfg.system.get("temperature", 0.0) / (HBAR * omega)
    p = boltzmann_populations(theta, cfg.n_max).p
    rows = [[n, float(v)] for n, v in enumerate(p)]
    return [Table("equilibrium", ["n", "p"], rows)], {"theta": theta, "one_minus_p0": float(1 - p[0])}


def mode_semiclassical(cfg: RunConfig):
    sc = cfg.semiclassical
    params = cfg.system_params()
    mb = params.m_b / params.m_a
    a_vals = np.linspace(sc.a_min, sc.a_max, sc.a_count)
    rows = [[float(a), constant_C(float(a), mb), n_cutoff(float(a), mb)] for a in a_vals]
    tables = [Table("C_of_a", ["a", "C", "n_cut"], rows)]
    extra = {}
    if derive(params).regime == Regime.SUPERSONIC and math.isclose(mb, 1.0, rel_tol=1e-9):
        tc = term_comparison(sc.n_initial, params)
        trows = [[int(k), float(q), float(s), float(qw), float(sw)] for k, q, s, qw, sw in
                 zip(tc.k, tc.quantum, tc.semiclassical, tc.quantum_weighted, tc.semiclassical_weighted)]
        tables.append(Table("terms", ["k", "quantum_F", "semiclassical_F", "quantum_weighted",
                                      "semiclassical_weighted"], trows))
        extra["terms_a"] = tc.a
    else:
        extra["terms_skipped"] = "term comparison needs the Supersonic regime with m_a = m_b"
    return tables, extra


def mode_compare(cfg: RunConfig):
    params = cfg.system_params()
    d = derive(params)
    if d.regime == Regime.SUPERSONIC:
        di = d.to_internal()
        if not math.isclose(di.m_b, 1.0, rel_tol=1e-9):
            raise ValueError("the supersonic comparison assumes m_a = m_b")
        n = cfg.semiclassical.n_initial
        tc = term_comparison(n, params)
        quantum = float(tc.quantum_weighted.sum())
        a = amplitude_parameter(n, di.m_b)
        semi = spectrum(a, di.m_b).total
        C = constant_C(a, di.m_b)
        rows = [[n, a, quantum, semi, semi / quantum, C,
                 semiclassical_quantum_ratio(C, FITTED_ALPHA_SUPERSONIC)]]
        cols = ["n", "a", "quantum_sum", "semiclassical_sum", "ratio", "C", "ratio_closed_form"]
        return [Table("compare", cols, rows)], {"regime": d.regime.value}
    if d.regime == Regime.SUBSONIC:
        R = _rate_matrix(cfg)
        ed = energy_dissipation_profile(R)
        rows = []
        for n in range(1, R.size):
            s = edot_semiclassical_subsonic(n, params)
            rows.append([n, float(ed[n]), s, abs(s / ed[n] - 1)])
        return ([Table("compare", ["n", "edot_quantum", "edot_semiclassical", "relative_difference"], rows)],
                {"regime": d.regime.value})
    raise RegimeError("compare needs the Supersonic or Subsonic regime")


def _onedim_params(cfg: RunConfig, **overrides) -> OneDimParams:
    s = cfg.system
    od = cfg.onedim
    vals = dict(m_a=s["mass_a"], m_b=s["mass_b"], a_ab=s["a_ab"], a_bb=s["a_bb"],
                rho0_1d=od.rho0_1d, l_perp=od.l_perp, omega=s["omega"], g_ab_1d=od.g_ab_1d)
    vals.update(overrides)
    return OneDimParams(**vals)


def mode_onedim(cfg: RunConfig):
    p = _onedim_params(cfg)
    check_validity(p)
    lp = luttinger_parameters(p, cfg.onedim.gamma_lo, cfg.onedim.gamma_hi)
    rows = []
    if not lp.in_window:
        rc = rate_constant_1d(p, cfg.onedim.gamma_lo, cfg.onedim.gamma_hi)
        rows.append(["selected", lp.gamma, lp.K, lp.v_s, rc.gamma_eps, rc.gamma_eps_over_omega, rc.estimate])
    for label, (K, v) in (("weak_limit", lp.weak), ("strong_limit", lp.strong)):
        if math.isnan(K):
            rows.append([label, lp.gamma, None, v, None, None, None])
            continue
        g = damping_constant_1d(p, K, v)
        rows.append([label, lp.gamma, K, v, g, g / p.omega, None])
    cols = ["evaluation", "gamma", "K", "v_s_m_s", "gamma_eps_per_s", "gamma_eps_over_omega", "estimate_per_s"]
    return [Table("onedim", cols, rows)], {"branch": lp.branch, "non_universal_window": lp.in_window,
                                           "g_bb_1d": p.g_bb, "g_ab_1d": p.g_ab}


def _sweep_point(args):
    cfg, value_si = args
    q = cfg.sweep.quantity
    if q in ("rho0_1d", "l_perp"):
        p = _onedim_params(cfg, **{q: value_si})
        check_validity(p)
        lp = luttinger_parameters(p, cfg.onedim.gamma_lo, cfg.onedim.gamma_hi)
        if lp.in_window:
            return [lp.gamma, lp.branch, None, None, None]
        rc = rate_constant_1d(p, cfg.onedim.gamma_lo, cfg.onedim.gamma_hi)
        return [lp.gamma, lp.branch, lp.K, rc.gamma_eps, rc.gamma_eps_over_omega]
    params = cfg.system_params(**{q: value_si})
    d = derive(params)
    f10 = transition_rate(1, 0, d, RateMode(cfg.rate_mode), cfg.quad_rel_tol)
    return [d.regime.value, d.ratio, f10, f10 / supersonic_prefactor(d), f10 / subsonic_prefactor(d),
            1.0 / (2 * math.pi * f10), 1.0 / (f10 * params.omega)]


def mode_sweep(cfg: RunConfig, workers: int = 1):
    values = cfg.sweep.values()
    si = cfg.sweep.values_si()
    jobs = [(cfg, float(v)) for v in si]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    if cfg.sweep.quantity in ("rho0_1d", "l_perp"):
        cols = ["gamma", "branch", "K", "gamma_eps_per_s", "gamma_eps_over_omega"]
    else:
        cols = ["regime", "ratio", "rate_1to0_per_omega", "F_1to0_supersonic_dimensionless",
                "F_1to0_subsonic_dimensionless", "tau_1to0_cycles", "tau_1to0_s"]
    rows = [[i, float(v)] + r for i, (v, r) in enumerate(zip(values, results))]
    return [Table("sweep", ["index", cfg.sweep.parameter] + cols, rows)], {"workers": workers}


MODE_FUNCS = {
    "rates": mode_rates, "evolve": mode_evolve, "dissipation": mode_dissipation,
    "equilibrium": mode_equilibrium, "semiclassical": mode_semiclassical, "compare": mode_compare,
    "onedim": mode_onedim, "sweep": mode_sweep,
}


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_csv(t: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.columns)
    for r in t.rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def table_json(t: Table) -> str:
    return json.dumps({"table": t.name, "columns": t.columns, "rows": t.rows}, indent=1) + "\n"


def validate_table(t: Table):
    """Probabilities in [0, 1], rates non-negative, no NaN or inf anywhere."""
    for r in t.rows:
        for c, v in zip(t.columns, r):
            if isinstance(v, float) and not math.isfinite(v):
                raise OutputValidationError(f"{t.name}.{c} is not finite: {v!r}")
            if v is None or not isinstance(v, (int, float)):
                continue
            if (c == "p" or c.startswith("p_")) and not 0.0 <= v <= 1.0:
                raise OutputValidationError(f"{t.name}.{c} = {v!r} is not a probability")
            if (c.startswith("F_") or c.startswith("H_") or c.startswith("rate_")) and v < 0:
                raise OutputValidationError(f"{t.name}.{c} = {v!r} is negative")


def write_outputs(tables, out_dir, formats):
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for t in tables:
        validate_table(t)
        if "csv" in formats:
            path = os.path.join(out_dir, f"{t.name}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(table_csv(t))
            written.append(os.path.basename(path))
        if "json" in formats:
            path = os.path.join(out_dir, f"{t.name}.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(table_json(t))
            written.append(os.path.basename(path))
    return written


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def run(cfg: RunConfig, workers: int = 1) -> dict:
    """Execute a parsed config, write its tables and manifest, return the manifest."""
    t0 = time.perf_counter()
    func = MODE_FUNCS[cfg.mode]
    tables, extra = func(cfg, workers) if cfg.mode == "sweep" else func(cfg)
    files = write_outputs(tables, cfg.output_dir, cfg.formats)
    derived = {}
    if all(q in cfg.system for q in ("mass_a", "mass_b", "a_ab", "a_bb", "rho0", "omega")):
        derived = _derived_dict(cfg)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool": "bogocool",
        "version": __version__,
        "mode": cfg.mode,
        "config": cfg.to_text(),
        "derived": derived,
        "details": extra,
        "tables": {t.name: t.columns for t in tables},
        "files": files,
        "wall_time_s": time.perf_counter() - t0,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(os.path.join(cfg.output_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(_jsonable(manifest), fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def _exit_code(exc) -> int:
    if isinstance(exc, (ConfigError, InvalidParameterError)):
        return EXIT_CONFIG
    if isinstance(exc, RegimeError):
        return EXIT_REGIME
    if isinstance(exc, (QuadratureError, ProbabilityDriftError, LaguerreRangeError,
                        OutputValidationError, OverflowError)):
        return EXIT_NONCONVERGENCE
    if isinstance(exc, ValueError):
        return EXIT_CONFIG
    return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bogocool",
                                 description="Cooling of a trapped atom immersed in a superfluid.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, help="key = value config file with [sections]")
    ap.add_argument("--out", help="output directory (overrides [output] directory)")
    ap.add_argument("--workers", type=int, default=1, help="processes for sweep mode")
    ap.add_argument("--format", help="comma-separated subset of csv,json")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1", key="workers")
        cfg = load_config(args.config, args.mode)
        changes = {}
        if args.out:
            changes["output_dir"] = args.out
        if args.format:
            fmts = tuple(f.strip().lower() for f in args.format.split(",") if f.strip())
            if not fmts or any(f not in ("csv", "json") for f in fmts):
                raise ConfigError("--format must be a non-empty subset of csv,json", key="format")
            changes["formats"] = fmts
        if changes:
            cfg = replace(cfg, **changes)
        manifest = run(cfg, args.workers)
    except Exception as exc:  # every failure leaves a machine-readable record
        code = _exit_code(exc)
        if code == 1:
            log.exception("unexpected failure")
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        for attr in ("key", "line", "field"):
            if getattr(exc, attr, None) is not None:
                err[attr] = getattr(exc, attr)
        sys.stderr.write(json.dumps(err) + "\n")
        return code
    log.info("wrote %s to %s", ", ".join(manifest["files"]), cfg.output_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
