"""Command-line experiment runner.

    siderian MODE [--config PATH] [--out DIR] [--seed N] [--quiet]

Exit codes: 0 success, 1 error (invalid config or failed run), 2 the
requested certificate was not obtained.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import plasma as pl
from .config import MODES, ConfigError, ExperimentConfig, load_raw, parse_config
from .eos import PolytropicEos, verify_assumptions
from .numerics import check_uniform
from .relfluid import (DataFamilyParams, RadialMesh, breakdown_time_bound, check_conditions,
                       find_blowup_nbar, make_initial_data)
from .solver.diagnostics import BreakdownThresholds, write_profile_csv
from .solver.fluid import RelativisticFluidSolver
from .solver.grid import RadialGrid
from .solver.plasma import PlasmaSolver
from .solver.run import CFLViolation, RunConfig, run_fluid, run_plasma

EXIT_OK, EXIT_ERROR, EXIT_NOT_CERTIFIED = 0, 1, 2


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# pipelines


def _eos(cfg: ExperimentConfig) -> PolytropicEos:
    e = cfg.section("eos")
    return PolytropicEos(e["gamma"], e["a0"], e["entropy_law"])


def _fluid_params(cfg: ExperimentConfig, nbar: float = 1.0) -> DataFamilyParams:
    e, sh, bg = cfg.section("eos"), cfg.section("shapes"), cfg.section("background")
    return DataFamilyParams.default(nbar=nbar, sbar=bg["sbar"], gamma=e["gamma"], kappa=sh["kappa"],
                                    mu=sh["mu"], edge=sh["edge"], a0=e["a0"], entropy_law=e["entropy_law"])


def _grid(cfg: ExperimentConfig, default_n: int) -> RadialGrid:
    g = cfg.section("grid")
    return RadialGrid(g["N"] or default_n, g["r_max"])


def _thresholds(cfg: ExperimentConfig) -> BreakdownThresholds:
    b = cfg.section("breakdown")
    return BreakdownThresholds(b["grad_factor"], b["steepening"])


def run_eos_check(cfg: ExperimentConfig) -> tuple[dict, int]:
    g = cfg.section("eos_grid")
    eos = _eos(cfg)
    n_grid = np.geomspace(g["n_min"], g["n_max"], g["n_points"])
    s_grid = np.linspace(0.0, g["s_max"], g["s_points"])
    rep = verify_assumptions(eos, n_grid, s_grid)
    out = {"mode": "eos-check", "gamma": eos.gamma, "a0": eos.a0, "entropy_law": eos.entropy_law}
    out.update(rep.to_dict())
    return out, EXIT_OK if rep.passed else EXIT_NOT_CERTIFIED


def _resolve_fluid(cfg: ExperimentConfig):
    """Fluid parameters with nbar from the config or from the scan."""
    nbar = cfg.section("background")["nbar"]
    scan_info = None
    if nbar is None:
        sc = cfg.section("scan")
        scan = find_blowup_nbar(_fluid_params(cfg), start=sc["start"], stop=sc["stop"])
        scan_info = {"nbar": scan.nbar, "tried": [[a, b] for a, b in scan.tried]}
        if scan.nbar is None:
            return None, scan_info
        nbar = scan.nbar
    return _fluid_params(cfg, nbar), scan_info


def run_fluid_certify(cfg: ExperimentConfig) -> tuple[dict, int]:
    params, scan_info = _resolve_fluid(cfg)
    if params is None:
        return {"mode": "fluid-certify", "scan": scan_info, "certified": False}, EXIT_NOT_CERTIFIED
    bg = params.background
    rep = check_conditions(make_initial_data(params), bg, params.eos)
    rep.T_star = breakdown_time_bound(rep, bg)
    out = {"mode": "fluid-certify", "nbar": params.nbar, "report": rep.to_dict(),
           "certified": rep.all_pass}
    if scan_info is not None:
        out["scan"] = scan_info
    return out, EXIT_OK if rep.all_pass else EXIT_NOT_CERTIFIED


def run_scan_nbar(cfg: ExperimentConfig) -> tuple[dict, int]:
    sc = cfg.section("scan")
    scan = find_blowup_nbar(_fluid_params(cfg), start=sc["start"], stop=sc["stop"])
    out = {"mode": "scan-nbar", "nbar": scan.nbar, "tried": [[a, b] for a, b in scan.tried],
           "report": scan.report.to_dict() if scan.report else None}
    return out, EXIT_OK if scan.nbar is not None else EXIT_NOT_CERTIFIED


def _write_series(series, out_dir: Optional[Path], cfg: ExperimentConfig) -> Optional[str]:
    name = cfg.section("output")["series"]
    if out_dir is None or name is None:
        return None
    series.to_csv(out_dir / name)
    return name


def run_fluid_simulate(cfg: ExperimentConfig, out_dir: Optional[Path]) -> tuple[dict, int]:
    params, scan_info = _resolve_fluid(cfg)
    if params is None:
        return {"mode": "fluid-simulate", "scan": scan_info, "certified": False}, EXIT_NOT_CERTIFIED
    bg = params.background
    rep = check_conditions(make_initial_data(params), bg, params.eos)
    rep.T_star = breakdown_time_bound(rep, bg)
    g = cfg.section("grid")
    t_end = g["t_end"] if g["t_end"] is not None else (rep.T_star if rep.T_star is not None else 1.0)
    grid = _grid(cfg, 2048)
    if not grid.fits(bg.etabar, t_end, margin=0.0):
        raise ConfigError("grid.r_max: range of influence 1 + etabar t_end exceeds the grid")
    solver = RelativisticFluidSolver(grid, bg)
    res = run_fluid(solver, params.profiles,
                    RunConfig(t_end=t_end, cfl=g["cfl"], sample_every=g["sample_every"], thresholds=_thresholds(cfg)))
    s = res.series
    out = {"mode": "fluid-simulate", "nbar": params.nbar, "report": rep.to_dict(), "dt": res.dt,
           "steps": res.steps, "N": grid.n_cells, "r_max": grid.r_max, "run": s.summary(),
           "breakdown_before_T_star": (s.breakdown_time is not None and rep.T_star is not None
                                       and s.breakdown_time <= rep.T_star),
           "series": _write_series(s, out_dir, cfg)}
    prof = cfg.section("output")["profile"]
    if out_dir is not None and prof:
        pr = res.final_state.prim
        write_profile_csv(out_dir / prof, grid.centers, {"n": pr.n, "s": pr.s, "u": pr.u})
        out["profile"] = prof
    return out, EXIT_OK


def _plasma_bg(cfg: ExperimentConfig) -> pl.PlasmaBackground:
    p = cfg.section("plasma")
    return pl.PlasmaBackground(p["nbar"], p["sbar"], p["e"], p["m"], p["c"], _eos(cfg))


def _plasma_shapes(cfg: ExperimentConfig, lam: Optional[float] = None) -> pl.PlasmaShapes:
    sh = cfg.section("shapes")
    return pl.PlasmaShapes(sh["delta"], sh["sigma"], sh["lambda"] if lam is None else lam, sh["plasma_edge"])


def _plasma_data(cfg: ExperimentConfig) -> pl.RadialPlasmaData:
    # unit velocity amplitude; certificates scale it by lambda
    return pl.make_plasma_data(_plasma_shapes(cfg, 1.0), RadialMesh.nodes(cfg.section("grid")["r_max"]))


def run_plasma_certify(cfg: ExperimentConfig) -> tuple[dict, int]:
    bg = _plasma_bg(cfg)
    cert = pl.certify_blowup(_plasma_data(cfg), bg, cfg.section("shapes")["lambda"])
    out = {"mode": "plasma-certify", "units": cfg.section("plasma")["units"], "certificate": cert.to_dict(),
           "checks": cert.checks, "T_bound": cert.T_bound}
    return out, EXIT_OK if cert.verdict else EXIT_NOT_CERTIFIED


def run_scan_lambda(cfg: ExperimentConfig) -> tuple[dict, int]:
    bg = _plasma_bg(cfg)
    sc = cfg.section("scan")
    data = _plasma_data(cfg)
    lam, tried = pl.scan_lambda(data, bg, sc["lambda_start"], sc["max_doublings"])
    out = {"mode": "scan-lambda", "lambda_star": lam, "tried": [[a, b] for a, b in tried]}
    if lam is not None:
        cert = pl.certify_blowup(data, bg, lam)
        out["certificate"] = cert.to_dict()
        out["T_bound"] = cert.T_bound
    return out, EXIT_OK if lam is not None else EXIT_NOT_CERTIFIED


def plasma_identity_residuals(series, bg: pl.PlasmaBackground) -> dict:
    """Residuals of the oscillator and field-moment identities along a plasma series."""
    from scipy.integrate import cumulative_trapezoid

    t = series.array("t")
    Q = series.array("Q")
    G = series.array("G")
    if t.size < 3:
        return {}
    check_uniform(t)
    y = cumulative_trapezoid(Q, t, initial=0.0)
    ypp = np.gradient(Q, t, edge_order=2)
    m4 = series.extra["moment4"][0]
    fm = series.array("field_moment")
    gmax = float(np.max(np.abs(G))) or 1.0
    en = series.array("energy")
    return {
        "oscillator_residual": float(np.max(np.abs(ypp + bg.omega**2 * y - G))) / gmax,
        "moment_residual": float(np.max(np.abs(fm - pl.initial_field_moment(m4, bg.e) + 4 * math.pi * bg.e * y)))
        / max(float(np.max(np.abs(fm))), 1e-300),
        "max_abs_mass": float(np.max(np.abs(series.array("mass")))),
        "energy_drift": float(np.max(np.abs(en / en[0] - 1.0))) if en[0] != 0 else float("nan"),
        "max_poisson_residual": float(np.max(series.array("poisson_res"))),
    }


def run_plasma_simulate(cfg: ExperimentConfig, out_dir: Optional[Path]) -> tuple[dict, int]:
    bg = _plasma_bg(cfg)
    shapes = _plasma_shapes(cfg)
    g = cfg.section("grid")
    t_end = g["t_end"] if g["t_end"] is not None else 8.0
    grid = _grid(cfg, 4096)
    if not grid.fits(bg.etabar, t_end, margin=0.0):
        raise ConfigError("grid.r_max: range of influence 1 + etabar t_end exceeds the grid")
    solver = PlasmaSolver(grid, bg)
    res = run_plasma(solver, shapes.profile(bg),
                     RunConfig(t_end=t_end, cfl=g["cfl"], sample_every=g["sample_every"], thresholds=_thresholds(cfg)))
    s = res.series
    out = {"mode": "plasma-simulate", "lambda": shapes.lam, "dt": res.dt, "steps": res.steps,
           "N": grid.n_cells, "r_max": grid.r_max, "omega": bg.omega, "etabar": bg.etabar,
           "run": s.summary(), "identities": plasma_identity_residuals(s, bg),
           "series": _write_series(s, out_dir, cfg)}
    prof = cfg.section("output")["profile"]
    if out_dir is not None and prof:
        st = solver.snapshot(res.final_state)
        write_profile_csv(out_dir / prof, grid.centers,
                          {"n": st.n, "s": st.s, "u": st.u, "E": 0.5 * (st.E[1:] + st.E[:-1])})
        out["profile"] = prof
    return out, EXIT_OK


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None) -> tuple[dict, int]:
    """Run the pipeline for ``cfg.mode``; writes the JSON report into ``out_dir`` if given."""
    mode = cfg.mode
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    if mode == "eos-check":
        report, code = run_eos_check(cfg)
    elif mode == "fluid-certify":
        report, code = run_fluid_certify(cfg)
    elif mode == "scan-nbar":
        report, code = run_scan_nbar(cfg)
    elif mode == "fluid-simulate":
        report, code = run_fluid_simulate(cfg, out_dir)
    elif mode == "plasma-certify":
        report, code = run_plasma_certify(cfg)
    elif mode == "scan-lambda":
        report, code = run_scan_lambda(cfg)
    elif mode == "plasma-simulate":
        report, code = run_plasma_simulate(cfg, out_dir)
    else:  # pragma: no cover - validated earlier
        raise ConfigError(f"mode: unsupported {mode!r}")
    report["exit_code"] = code
    name = cfg.section("output")["report"]
    if out_dir is not None and name:
        (out_dir / name).write_text(dump_report(report))
    return report, code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="siderian", description="Blowup certificates and radial shock simulations.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", help="JSON config file ('-' for stdin); defaults apply when omitted")
    ap.add_argument("--out", default=None, help="output directory for the JSON report and CSV series")
    ap.add_argument("--seed", type=int, default=0, help="reserved; all pipelines are deterministic")
    ap.add_argument("--quiet", action="store_true", help="do not print the report")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = {} if args.config is None else load_raw(args.config)
        if raw.get("mode", args.mode) != args.mode:
            raise ConfigError(f"mode: config says {raw['mode']!r} but the subcommand is {args.mode!r}")
        raw["mode"] = args.mode
        cfg = parse_config(raw)
        report, code = run_experiment(cfg, Path(args.out) if args.out else None)
    except ConfigError as exc:
        print(f"siderian: invalid config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, RuntimeError, CFLViolation, FloatingPointError, OSError) as exc:
        print(f"siderian: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.quiet:
        sys.stdout.write(dump_report(report))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
