"""Command-line front end.

Exit codes: 0 success, 2 configuration or grid problem, 3 infeasible,
4 validation failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .environment import (BlackBodyModel, GasModel, TemperatureOutOfRange, absorbed_power,
                          bb_localization_rate, duty_cycle_temperature, gas_collision_rate,
                          internal_temperature_evolution, no_collision_probability,
                          pressure_for_quantile)
from .core import AMU
from .optimize import InfeasibleError, default_contour, optimize_coherence_length, optimize_splitting
from .oracle import GridInsufficient, oracle_battery
from .pattern import decohered_density, unitary_density
from .pipeline import evaluate, mapped_params, omega2_readings
from .records import write_csv, write_json

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_VALIDATION = 0, 2, 3, 4
BB_ENV = "LEVINTERF_BB_TABLE"
MBAR = 100.0


def _config(args, required=()) -> ScenarioConfig:
    if args.config is None:
        return parse_config("", "<defaults>", required)
    return load_config(args.config, required)


def _bb(args, cfg: ScenarioConfig) -> BlackBodyModel | None:
    path = args.bb_table or cfg.get("bb_table") or os.environ.get(BB_ENV)
    if not path:
        return None
    try:
        return BlackBodyModel.from_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigError([f"black-body table {path}: {exc}"]) from None


def _bb_flags(bb: BlackBodyModel | None) -> list[str]:
    if bb is None:
        return ["no black-body table: Lambda_bb = 0 fallback"]
    if "placeholder" in bb.source.lower():
        return [f"black-body quantities from PLACEHOLDER table {bb.source} (not measured data)"]
    return [f"black-body quantities depend on table {bb.source}"]


def _m_sigma(args, cfg):
    return args.m_sigma if args.m_sigma is not None else cfg.get("m_sigma")


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- case study -------------------------------------------------------------------------

def cmd_case_study(args) -> int:
    cfg = _config(args, ("tau1_ms", "phi2_pi", "tau3_ms"))
    particle = cfg.particle()
    params = cfg.protocol()
    bb = _bb(args, cfg)
    flags = _bb_flags(bb)
    T_e = cfg.get("T_e_K")
    tau_f = params.tau1 + params.tau2 + params.tau3 + params.tau4
    thermal = None
    lam_bb = 0.0
    if bb is not None:
        p_abs = absorbed_power(particle, params.omega0)
        T_i = duty_cycle_temperature(particle, bb, T_e, params.tau0, tau_f, p_abs)
        lam_bb = bb_localization_rate(particle, bb, T_i, T_e)
        thermal = dict(T_i=T_i, p_abs=p_abs, lambda_bb=lam_bb, off_time=tau_f)
    notes = []
    if not cfg.has("omega2_khz"):
        params = mapped_params(params, particle, lam_bb)
        notes.append("omega2 from the exact mapping condition")
    ev = evaluate(params, particle, lam_bb, cfg.get("mapping"), _m_sigma(args, cfg),
                  with_g1=params.tau4 == 0 or params.omega4 == 0)
    out = _out(args)
    record = dict(
        inputs=cfg.echo(),
        protocol=dict(omega2=math.sqrt(params.omega2_sq), omega_p=params.omega_p,
                      **omega2_readings(params, particle, ev.rates.lambda1)),
        mapping_mode=ev.mapping_mode,
        pattern=ev.pattern_dict(),
        budget=ev.budget.as_dict(),
        rates=ev.rates.as_dict(),
        chirp=dict(b_c=ev.chirp.b_c, sigma_bc_over_dx=ev.chirp.sigma_bc_over_dx,
                   valid=ev.chirp.valid),
        metrics=ev.metrics.as_dict(),
        coherence=ev.report.as_dict(),
        thermal=thermal,
        warnings=list(ev.warnings),
        notes=notes)
    units = dict(lengths="m", times="s", frequencies="rad/s", rates="1/(m^2 s)",
                 temperatures="K", power="W", sigma01_sigma2="kg m/s",
                 inputs="as named by key suffix")
    write_json(out / "case_study.json", record, units, flags, timestamp=not args.no_timestamp)
    pat = ev.pattern
    x = np.linspace(-(40 * pat.delta_x + 8 * pat.sigma_lambda), 8 * pat.delta_x + 8 * pat.sigma_lambda,
                    cfg.get("pattern_points"))
    write_csv(out / "pattern.csv", ["x_m", "unitary_per_m", "decohered_per_m"],
              zip(x.tolist(), unitary_density(pat, x).tolist(), decohered_density(pat, x).tolist()),
              dict(x_m="m", unitary_per_m="1/m", decohered_per_m="1/m"), flags,
              ["plot window; the far Airy tail continues to the left"] + notes)
    m = ev.metrics
    print(f"p_c={ev.pattern.p_c:.4g} p_lambda={ev.pattern.p_lambda:.4g} v={m.visibility:.4g} "
          f"p_r={m.p_r:.4g} q={m.quality:.4g} N={m.n_runs_5sigma:.0f} "
          f"x_c*={ev.report.x_c_star:.4g} m")
    for f in flags:
        print(f"CONDITIONAL: {f}")
    for n in notes:
        print(f"note: {n}")
    if ev.extrema is None or not ev.chirp.valid:
        print("infeasible: no fringes or residual chirp too large", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------------

SWEEP_COLUMNS = ["point", "radius_m", "T_e_K", "tau_f_s", "feasible", "objective_m", "tau1_s",
                 "tau3_s", "phi2_rad", "tau4_s", "omega2_rad_per_s", "p_c", "p_lambda",
                 "visibility", "p_r", "quality", "g1", "T_i_K", "reason"]
SWEEP_UNITS = dict(radius_m="m", T_e_K="K", tau_f_s="s", objective_m="m", tau1_s="s",
                   tau3_s="s", phi2_rad="rad", tau4_s="s", omega2_rad_per_s="rad/s",
                   feasible="bool", point="index", T_i_K="K")


def _sweep_point(job):
    i, objective, radius, T_e, tau_f, kw, bb, contour = job
    try:
        if objective == "splitting":
            r = optimize_splitting(radius, tau_f, contour=contour, **kw)
        else:
            r = optimize_coherence_length(radius, T_e, tau_f, bb=bb, contour=contour, **kw)
        d = r.as_dict()
    except (InfeasibleError, TemperatureOutOfRange, ValueError, RuntimeError) as exc:
        d = dict(feasible=False, reason=str(exc))
    return [i, radius, T_e, tau_f, bool(d.get("feasible")), d.get("objective"), d.get("tau1"),
            d.get("tau3"), d.get("phi2"), d.get("tau4"), d.get("omega2"), d.get("p_c"),
            d.get("p_lambda"), d.get("visibility"), d.get("p_r"), d.get("quality"),
            d.get("g1"), d.get("T_i"), d.get("reason", "")]


def cmd_sweep(args) -> int:
    cfg = _config(args, ("sweep_param", "sweep_values"))
    param = cfg.get("sweep_param")
    values = cfg.raw["sweep_values"]
    objective = cfg.get("objective")
    bb = _bb(args, cfg) if objective == "coherence_length" else None
    flags = _bb_flags(bb) if objective == "coherence_length" else [
        "black-body and gas decoherence omitted"]
    q = cfg.get("q_target")
    base = dict(radius_nm=cfg.get("radius_nm"), T_e_K=cfg.get("T_e_K"),
                tau_f_ms=cfg.get("tau_f_ms") or (2.1e-3 if objective == "coherence_length" else 0.35))
    scale = dict(radius_nm=1e-9, T_e_K=1.0, tau_f_ms=1e-3)[param]
    kw = dict(q_target=q, material=cfg.material(), omega0=cfg.get("omega0_khz"),
              nbar=cfg.get("nbar"), tau2=cfg.get("tau2_us"), m_sigma=_m_sigma(args, cfg),
              n_tau=cfg.get("grid_tau"), n_phi=cfg.get("grid_phi"))
    if objective == "splitting":
        kw["g1_min"] = cfg.get("g1_min")
    else:
        kw.update(fringe_target=cfg.get("fringe_target_nm"), omega4=cfg.get("omega4_khz"),
                  tau0=cfg.get("tau0_ms"))
    contour = default_contour(q) if values else None
    jobs = []
    for i, v in enumerate(values):
        point = dict(base)
        point[param] = v * scale
        jobs.append((i, objective, point["radius_nm"], point["T_e_K"], point["tau_f_ms"], kw,
                     bb, contour))
    workers = args.workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(workers, len(jobs))) as ex:
            rows = list(ex.map(_sweep_point, jobs))  # map keeps input order
    else:
        rows = [_sweep_point(j) for j in jobs]
    out = _out(args)
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows, SWEEP_UNITS, flags,
              [f"objective={objective} sweep_param={param} q_target={q}"])
    print(f"{len(rows)} sweep points, {sum(1 for r in rows if r[4])} feasible")
    return EXIT_OK


# -- optimize-splitting ------------------------------------------------------------------

def cmd_optimize_splitting(args) -> int:
    cfg = _config(args)
    tau_f = cfg.get("tau_f_ms") or 0.35
    r = optimize_splitting(cfg.get("radius_nm"), tau_f, cfg.get("q_target"), cfg.get("g1_min"),
                           cfg.material(), cfg.get("omega0_khz"), cfg.get("nbar"),
                           cfg.get("tau2_us"), _m_sigma(args, cfg), cfg.get("grid_tau"),
                           cfg.get("grid_phi"))
    out = _out(args)
    write_json(out / "splitting.json", dict(inputs=cfg.echo(), tau_f=tau_f, result=r.as_dict()),
               dict(lengths="m", times="s", angles="rad", frequencies="rad/s"),
               r.conditional_flags, timestamp=not args.no_timestamp)
    if not r.feasible:
        print(f"infeasible: {r.reason}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"peak distance={r.objective:.4g} m tau1={r.tau1:.4g} s tau3={r.tau3:.4g} s "
          f"phi2={r.phi2 / math.pi:.4g} pi omega2/2pi={r.omega2 / (2 * math.pi):.4g} Hz "
          f"g1={r.g1:.4g}")
    return EXIT_OK


# -- oracle-validate -------------------------------------------------------------------------

def cmd_oracle_validate(args) -> int:
    cfg = _config(args)
    checks = oracle_battery(cfg.get("oracle_protocols"), cfg.get("oracle_seed"),
                            cfg.get("oracle_corrupt_delta_x"), args.workers or os.cpu_count() or 1,
                            cfg.get("oracle_max_points"), cfg.get("l1_tol"))
    out = _out(args)
    flags = []
    if cfg.get("oracle_corrupt_delta_x") != 1.0:
        flags.append(f"debug: analytic delta_x scaled by {cfg.get('oracle_corrupt_delta_x')}")
    write_csv(out / "oracle.csv", ["name", "value", "tolerance", "passed", "detail"],
              ([c.name, c.value, c.tolerance, c.passed, c.detail] for c in checks),
              dict(value="dimensionless (L1 or relative error; airy zero: absolute)"), flags)
    failed = [c for c in checks if not c.passed]
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} value={c.value:.3g} tol={c.tolerance:g}")
    if failed:
        print("validation failed: " + ", ".join(f"{c.name}={c.value:.3g}" for c in failed),
              file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# -- pressure-requirement -----------------------------------------------------------------------

def cmd_pressure(args) -> int:
    cfg = _config(args, ("tau_f_ms",))
    gas = GasModel(cfg.get("T_e_K"), 1.0, cfg.get("gas_mass_amu") * AMU)
    radius = cfg.get("radius_nm")
    tau_f = cfg.get("tau_f_ms")
    qv = cfg.get("quantile")
    if not qv < 1:
        raise ConfigError([f"{cfg.source}: quantile must lie in (0, 1)"])
    p = pressure_for_quantile(gas, radius, tau_f, qv)
    rec = dict(inputs=cfg.echo(), pressure_Pa=p, pressure_mbar=p / MBAR, mean_speed=gas.mean_speed,
               collision_rate_per_Pa=gas_collision_rate(gas, radius))
    if cfg.has("pressure_mbar"):
        g2 = GasModel(gas.temperature, cfg.get("pressure_mbar"), gas.gas_mass)
        rec["at_pressure"] = dict(pressure_Pa=g2.pressure, rate=gas_collision_rate(g2, radius),
                                  no_collision_probability=no_collision_probability(g2, radius, tau_f))
    out = _out(args)
    write_json(out / "pressure.json", rec, dict(pressure_Pa="Pa", pressure_mbar="mbar",
                                                  mean_speed="m/s", rate="1/s",
                                                  collision_rate_per_Pa="1/(s Pa)"),
               timestamp=not args.no_timestamp)
    print(f"P_{qv:g} = {p / MBAR:.4g} mbar ({p:.4g} Pa)")
    return EXIT_OK


# -- thermal ------------------------------------------------------------------------------------

def cmd_thermal(args) -> int:
    cfg = _config(args, ("tau_f_ms",))
    bb = _bb(args, cfg)
    flags = _bb_flags(bb)
    if bb is None:
        bb = BlackBodyModel.placeholder()
        flags = ["no black-body table: bundled PLACEHOLDER model used, values not physical"]
    particle = cfg.particle()
    T_e = cfg.get("T_e_K")
    omega0 = cfg.get("omega0_khz")
    p_abs = absorbed_power(particle, omega0)
    tau0, tau_f = cfg.get("tau0_ms"), cfg.get("tau_f_ms")
    hist = internal_temperature_evolution(particle, bb, T_e, tau0, tau_f, cfg.get("n_runs"), p_abs)
    duty = duty_cycle_temperature(particle, bb, T_e, tau0, tau_f, p_abs)
    out = _out(args)
    write_csv(out / "thermal.csv", ["time_s", "T_i_K"], zip(hist.time, hist.T_i),
              dict(time_s="s", T_i_K="K"), flags,
              [f"dark time per cycle {tau_f!r} s, light time {tau0!r} s"])
    summary = dict(hist.summary(), T_duty_cycle=duty, p_abs=p_abs)
    write_json(out / "thermal.json", dict(inputs=cfg.echo(), summary=summary),
               dict(T="K", p_abs="W"), flags, timestamp=not args.no_timestamp)
    print(f"T_ss={hist.T_ss:.4g} K T_steady={hist.T_steady:.4g} K duty-cycle T={duty:.4g} K "
          f"runs_to_steady={hist.runs_to_steady}")
    for f in flags:
        print(f"CONDITIONAL: {f}")
    return EXIT_OK


COMMANDS = {
    "case-study": cmd_case_study,
    "sweep": cmd_sweep,
    "optimize-splitting": cmd_optimize_splitting,
    "oracle-validate": cmd_oracle_validate,
    "pressure-requirement": cmd_pressure,
    "thermal": cmd_thermal,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levinterf", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"levinterf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value scenario file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--workers", type=int, default=None, help="worker processes")
        p.add_argument("--bb-table", help="black-body CSV (T_K,p_bb_W_per_m3,gamma_bb_per_m5s)")
        p.add_argument("--m-sigma", type=float, default=None,
                       help="confidence level for the run count (default 5)")
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit timestamps for byte-identical reruns")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except GridInsufficient as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except TemperatureOutOfRange as exc:
        print(f"black-body table does not cover the request: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
