"""Command-line front end for warped filter-bank design and evaluation.

Commands: bands, design, evaluate, simulate, compare, reproduce.
Configuration is a JSON document with sections bank/model/design/sim/output;
unknown keys are rejected and the effective (defaults-filled) configuration
is echoed next to every output for reproducibility.

Exit codes: 0 success, 2 configuration error, 3 solver/simulation failure,
4 reproduction-criterion failure.
"""

import argparse
import copy
import csv
import json
import os
import sys

import numpy as np

from . import reference as ref
from .aec_sim import DesignBundle, SimConfig, compare_designs, run_simulation
from .alias_metrics import sar
from .analysis_design import SourceModel, solve_analysis, solve_analysis_method_b
from .convexsolve import SolverFailure
from .synthesis_design import build_synthesis_qp, solve_synthesis, synthesis_kkt_residual
from .warpcore import BankSpec, PrototypeFilter, band_edges, overall_transfer

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ACCEPTANCE = 4


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "bank": {"M": 16, "mu": 0.5, "D": [2] * 16},
    "model": {"pxx": "white", "s2": "white"},
    "design": {"grid_n": 256, "epsilon": 1e-6, "delta": None, "method": "proposed"},
    "sim": {
        "sample_rate": 16000,
        "duration": 10.0,
        "adapt_start": 1.0,
        "fullband_taps": 256,
        "step_size": 0.5,
        "nlms_eps": 1e-6,
        "seed": 3,
        "signal_kind": "white",
        "signal_params": {},
    },
    "output": {"directory": "."},
}


def load_config(path):
    """Read, validate against the schema, and default-fill a config file."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        return cfg
    try:
        with open(path) as f:
            user = json.load(f)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s" % (path, exc))
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    for section, values in user.items():
        if section not in cfg:
            raise ConfigError("unknown config section %r" % section)
        if not isinstance(values, dict):
            raise ConfigError("config section %r must be an object" % section)
        for key, val in values.items():
            if key not in cfg[section]:
                raise ConfigError("unknown key %r in section %r" % (key, section))
            cfg[section][key] = val
    return cfg


def bank_from_config(cfg):
    b = cfg["bank"]
    try:
        return BankSpec(M=int(b["M"]), mu=float(b["mu"]), D=tuple(b["D"]))
    except (ValueError, TypeError) as exc:
        raise ConfigError("invalid bank section: %s" % exc)


def model_from_config(cfg):
    m = cfg["model"]
    if m["pxx"] == "white" and m["s2"] == "white":
        return SourceModel.white()
    if m["pxx"] == "colored":
        return SourceModel.colored_default()
    if m["pxx"] == "speech_like":
        return SourceModel.speech_like()
    # CSV path: columns omega, pxx [, s2]
    omega, pxx, s2 = _read_model_csv(m["pxx"])
    if m["s2"] != "white":
        _, s2_grid, _ = _read_model_csv(m["s2"])
        if s2_grid.size != omega.size:
            raise ConfigError("pxx and s2 grids have different lengths")
        s2 = s2_grid
    elif s2 is None:
        s2 = np.ones_like(pxx)
    return SourceModel(omega, pxx, s2)


def _read_model_csv(path):
    try:
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ConfigError("cannot read model CSV %s: %s" % (path, exc))
    if rows.shape[1] < 2:
        raise ConfigError("model CSV needs columns omega,pxx[,s2]")
    s2 = rows[:, 2] if rows.shape[1] >= 3 else None
    return rows[:, 0], rows[:, 1], s2


def _outdir(cfg, args):
    d = args.out or cfg["output"]["directory"]
    os.makedirs(d, exist_ok=True)
    return d


def _echo_config(cfg, outdir):
    with open(os.path.join(outdir, "effective_config.json"), "w") as f:
        json.dump(cfg, f, indent=2, sort_keys=True)
        f.write("\n")


def write_coeff_csv(path, proto):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["coefficient"])
        for v in proto.coeffs:
            w.writerow(["%.17g" % v])


def read_coeff_csv(path, kind):
    try:
        vals = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=1)
    except OSError as exc:
        raise ConfigError("cannot read coefficient file %s: %s" % (path, exc))
    return PrototypeFilter(tuple(float(v) for v in vals), kind)


# ---------------------------------------------------------------------------
# commands

def cmd_bands(args):
    cfg = load_config(args.config)
    spec = bank_from_config(cfg)
    outdir = _outdir(cfg, args)
    _echo_config(cfg, outdir)
    rows = []
    for i in range(spec.M):
        b = band_edges(spec, i)
        rows.append((i, b.Omega_l, b.Omega_h))
    print("band  Omega_l    Omega_h")
    for i, lo, hi in rows:
        print("%4d  %9.4f  %9.4f" % (i, lo, hi))
    with open(os.path.join(outdir, "bands.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["band", "omega_l", "omega_h"])
        for i, lo, hi in rows:
            w.writerow([i, "%.4f" % lo, "%.4f" % hi])
    return EXIT_OK


def _design(cfg, grid_override=None, method_override=None):
    spec = bank_from_config(cfg)
    model = model_from_config(cfg)
    d = cfg["design"]
    grid_n = int(grid_override or d["grid_n"])
    method = method_override or d["method"]
    if method not in ("proposed", "method_b"):
        raise ConfigError("design method must be 'proposed' or 'method_b'")
    solver = solve_analysis if method == "proposed" else solve_analysis_method_b
    design = solver(spec, model, grid_n=grid_n, epsilon=float(d["epsilon"]))
    qp = build_synthesis_qp(spec, design.prototype,
                            delta=None if d["delta"] is None else float(d["delta"]))
    g = solve_synthesis(qp)
    return spec, model, design, qp, g


def cmd_design(args):
    cfg = load_config(args.config)
    if args.method:
        cfg["design"]["method"] = args.method
    if args.grid:
        cfg["design"]["grid_n"] = int(args.grid)
    outdir = _outdir(cfg, args)
    _echo_config(cfg, outdir)
    spec, model, design, qp, g = _design(cfg)
    write_coeff_csv(os.path.join(outdir, "analysis.csv"), design.prototype)
    write_coeff_csv(os.path.join(outdir, "synthesis.csv"), g)
    report = {
        "method": cfg["design"]["method"],
        "lp_objective": design.objective,
        "lp_kkt_residual": design.lp_result.kkt_residual,
        "qp_kkt_residual": synthesis_kkt_residual(qp, g),
        "sar": sar(spec, design.prototype, model).as_dict(),
    }
    with open(os.path.join(outdir, "design_report.json"), "w") as f:
        json.dump(report, f, indent=2)
        f.write("\n")
    print("overall SAR: %.2f dB" % report["sar"]["overall_sar_db"])
    print("wrote analysis.csv, synthesis.csv, design_report.json to %s" % outdir)
    return EXIT_OK


def cmd_evaluate(args):
    cfg = load_config(args.config)
    spec = bank_from_config(cfg)
    model = model_from_config(cfg)
    outdir = _outdir(cfg, args)
    _echo_config(cfg, outdir)
    h = read_coeff_csv(args.analysis, "analysis")
    rep = sar(spec, h, model)
    with open(os.path.join(outdir, "sar_report.json"), "w") as f:
        json.dump(rep.as_dict(), f, indent=2)
        f.write("\n")
    with open(os.path.join(outdir, "sar_report.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["band", "sigma2", "alias2", "sar_db"])
        for i in range(spec.M):
            w.writerow([i, "%.17g" % rep.sigma2[i], "%.17g" % rep.alias2[i],
                        "inf" if not np.isfinite(rep.sar_db[i]) else "%.17g" % rep.sar_db[i]])
    print("overall SAR: %s dB" % ("inf" if not np.isfinite(rep.overall_sar_db)
                                  else "%.2f" % rep.overall_sar_db))
    if args.synthesis:
        g = read_coeff_csv(args.synthesis, "synthesis")
        wgrid = np.linspace(-np.pi, np.pi, 1024, endpoint=False)
        tl = np.abs(overall_transfer(spec, h, g, wgrid).t_l())
        with open(os.path.join(outdir, "overall_response.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["omega"] + ["abs_T_%d" % l for l in range(spec.Dmax)])
            for n in range(wgrid.size):
                w.writerow(["%.17g" % wgrid[n]] + ["%.17g" % tl[l, n] for l in range(spec.Dmax)])
        print("max | |T_l| - 1 |: %.3g" % float(np.max(np.abs(tl - 1.0))))
    return EXIT_OK


def _sim_config(cfg, spec, h, g, seed_override=None):
    s = cfg["sim"]
    return SimConfig(
        spec=spec, h=h, g=g,
        sample_rate=int(s["sample_rate"]), duration=float(s["duration"]),
        adapt_start=float(s["adapt_start"]), fullband_taps=int(s["fullband_taps"]),
        step_size=float(s["step_size"]), nlms_eps=float(s["nlms_eps"]),
        seed=int(seed_override if seed_override is not None else s["seed"]),
        signal_kind=s["signal_kind"], signal_params=dict(s["signal_params"]))


def _write_trace(outdir, name, trace):
    with open(os.path.join(outdir, name), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t_seconds", "erle_db"])
        for t, e in zip(trace.time, trace.erle_db):
            w.writerow(["%.17g" % t, "%.17g" % e])


def cmd_simulate(args):
    cfg = load_config(args.config)
    spec = bank_from_config(cfg)
    outdir = _outdir(cfg, args)
    _echo_config(cfg, outdir)
    h = read_coeff_csv(args.analysis, "analysis")
    g = read_coeff_csv(args.synthesis, "synthesis")
    try:
        trace = run_simulation(_sim_config(cfg, spec, h, g, args.seed))
    except ValueError as exc:
        raise ConfigError(str(exc))
    _write_trace(outdir, "erle_trace.csv", trace)
    summary = {"steady_state_db": trace.steady_state_db, "diverged": trace.diverged}
    with open(os.path.join(outdir, "sim_summary.json"), "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    print("steady-state ERLE: %.2f dB%s" % (trace.steady_state_db,
                                            "  (DIVERGED)" if trace.diverged else ""))
    return EXIT_SOLVER if trace.diverged else EXIT_OK


def cmd_compare(args):
    cfg = load_config(args.config)
    spec = bank_from_config(cfg)
    outdir = _outdir(cfg, args)
    _echo_config(cfg, outdir)
    bundles = []
    for method in ("proposed", "method_b"):
        c = copy.deepcopy(cfg)
        c["design"]["method"] = method
        _, _, design, _, g = _design(c, grid_override=args.grid)
        bundles.append(DesignBundle(method, spec, design.prototype, g))
    sim_cfg = _sim_config(cfg, spec, bundles[0].h, bundles[0].g, args.seed)
    report = compare_designs(sim_cfg, bundles)
    for name, trace in report["traces"].items():
        _write_trace(outdir, "erle_%s.csv" % name, trace)
    payload = {"designs": report["designs"],
               "steady_state_db": report["steady_state_db"],
               "deltas": report["deltas"]}
    with open(os.path.join(outdir, "compare_report.json"), "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    for name, val in report["steady_state_db"].items():
        print("%-12s steady-state ERLE %.2f dB" % (name, val))
    return EXIT_OK


def cmd_reproduce(args):
    from . import acceptance
    results = acceptance.run_all(only=args.only)
    for res in results:
        print(res.line())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "reproduce_report.json"), "w") as f:
            json.dump([{"index": r.index, "name": r.name, "passed": r.passed,
                        "measured": r.measured, "runtime_s": r.runtime_s}
                       for r in results], f, indent=2)
            f.write("\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def _apply_thread_cap():
    threads = os.environ.get("WARPBANK_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def build_parser():
    p = argparse.ArgumentParser(prog="warpbank", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, coeffs=False):
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out", help="output directory (overrides config)")
        if coeffs:
            sp.add_argument("--analysis", required=True, help="analysis coefficient CSV")
            sp.add_argument("--synthesis", help="synthesis coefficient CSV")

    sp = sub.add_parser("bands", help="print and write the warped band edges")
    common(sp)
    sp.set_defaults(func=cmd_bands)

    sp = sub.add_parser("design", help="design analysis and synthesis prototypes")
    common(sp)
    sp.add_argument("--method", choices=["proposed", "method_b"])
    sp.add_argument("--grid", type=int, help="alias grid points per band")
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("evaluate", help="SAR report and overall-response curves")
    common(sp, coeffs=True)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("simulate", help="run the echo-cancellation simulator")
    common(sp, coeffs=True)
    sp.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    sp.set_defaults(func=cmd_simulate)
    # synthesis file is mandatory for simulation
    sp.set_defaults(_needs_synthesis=True)

    sp = sub.add_parser("compare", help="design and simulate proposed vs baseline")
    common(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--grid", type=int)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("reproduce", help="run the full reproduction suite")
    sp.add_argument("--only", choices=["tables", "properties", "simulation"],
                    help="run only one criteria group")
    sp.add_argument("--out", help="directory for the JSON report")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None):
    _apply_thread_cap()
    args = build_parser().parse_args(argv)
    if getattr(args, "_needs_synthesis", False) and not args.synthesis:
        print("error: simulate requires --synthesis", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print("solver failure: %s" % exc, file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
