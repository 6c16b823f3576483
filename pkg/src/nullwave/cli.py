"""Command-line driver for the verification experiments.

Subcommands write machine-readable artifacts (JSON summaries, CSV
series, binary snapshots) into --out. Identical config and seed give
byte-identical text artifacts; nothing time- or host-dependent is
written.

Exit codes: 0 success, 2 configuration problems (nothing written),
3 numerical failure (diagnostic error.json written).
"""

import argparse
import configparser
import copy
import os
import sys

import numpy as np

from . import gridio, norms, penrose, picard, solver
from .errors import (CFLError, ConfigError, DomainError, FitError,
                     FormatError, NaNError, NoConvergence, OrderError,
                     ParamError)
from .exterior import (InitialData, Obstacle, build_masked_grid,
                       build_radial_grid, check_compatibility)
from .nullforms import NullFormSpec

SCHEMA_VERSION = 1

_NUMERICAL_ERRORS = (CFLError, DomainError, FitError, FormatError,
                     NaNError, NoConvergence, OrderError, ParamError)

# Base configuration; per-subcommand overlays below, user file on top.
DEFAULTS = {
    "grid": {
        "mode": "radial",
        "r0": 1.0,
        "r_max": 48.0,
        "n": 2000,
        "angular_mode": 0,
        "sponge_cells": 170,
        "sponge_strength": 4.0,
        "extent": 12.0,
    },
    "obstacle": {
        "kind": "sphere",
        "params": "1.0",
    },
    "data": {
        "family": "bump",
        "center": 2.0,
        "width": 0.8,
        "velocity": "profile",
        "eps": 1e-2,
    },
    "nullform": {
        "kind": "scalar_q0",
        "components": 1,
        "terms": "",
    },
    "run": {
        "t_end": 60.0,
        "dt": 0.0,
        "stride": 20,
        "tol": 1e-8,
        "max_iter": 12,
        "seed": 0,
    },
    "scan": {
        "eps": "1e-4 2e-4 4e-4 8e-4 1.6e-3",
    },
    "fit": {
        "model": "power",
        "window": "5 40",
        "local_radius": 4.0,
    },
    "report": {
        "time_stride": 20,
        "deltas": "3.6 3.2 2.8 2.0 1.0 0.3 0.0",
        "sup_window": "5 40",
    },
    "compat": {
        "order": 2,
    },
    "geometry": {
        "samples": 10000,
        "extent": 100.0,
    },
    "output": {
        "snapshots": True,
    },
}

# run-linear defaults reproduce the sphere local-energy decay
# experiment (first angular mode, reflecting outer edge far enough out
# that the returning front cannot reach the observation ball in time).
SUBCOMMAND_DEFAULTS = {
    "run-linear": {
        "grid": {"r_max": 36.0, "angular_mode": 1, "sponge_cells": 0},
        "data": {"center": 2.2, "velocity": "zero", "eps": 1.0},
        "nullform": {"kind": "linear"},
        "run": {"stride": 4},
        "fit": {"model": "exponential", "window": "5 12"},
    },
}


def _coerce(section, key, raw, default):
    try:
        if isinstance(default, bool):
            lowered = raw.strip().lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError("bad value for [%s] %s: %r" % (section, key, raw))


def load_config(path, subcommand):
    """Merge defaults, subcommand overlay, and the user's INI file."""
    cfg = copy.deepcopy(DEFAULTS)
    for section, entries in SUBCOMMAND_DEFAULTS.get(subcommand, {}).items():
        cfg[section].update(entries)
    if path is None:
        return cfg
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as e:
        raise ConfigError("cannot read config: %s" % e)
    except configparser.Error as e:
        raise ConfigError("cannot parse config: %s" % e)
    for section in parser.sections():
        if section not in cfg:
            raise ConfigError("unknown config section [%s]" % section)
        for key, raw in parser.items(section):
            if key not in cfg[section]:
                raise ConfigError("unknown key %r in section [%s]"
                                  % (key, section))
            cfg[section][key] = _coerce(section, key, raw,
                                        DEFAULTS[section][key])
    return cfg


def _floats(text, what):
    try:
        vals = [float(tok) for tok in text.split()]
    except ValueError:
        raise ConfigError("cannot parse %s list: %r" % (what, text))
    if not vals:
        raise ConfigError("empty %s list" % what)
    return vals


class ExperimentConfig:
    """Resolved experiment: grid, data family, null form, run window."""

    def __init__(self, cfg, seed, threads):
        self.raw = cfg
        self.seed = int(seed)
        self.threads = int(threads)
        try:
            self.grid = self._build_grid(cfg)
            self.spec = self._build_spec(cfg["nullform"])
            self.family = self._build_family(cfg["data"])
        except (ParamError, OrderError) as e:
            raise ConfigError(str(e))
        run = cfg["run"]
        self.t_end = float(run["t_end"])
        self.dt = float(run["dt"]) or None
        self.stride = int(run["stride"])
        self.tol = float(run["tol"])
        self.max_iter = int(run["max_iter"])
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")

    @staticmethod
    def _build_grid(cfg):
        g = cfg["grid"]
        if g["mode"] == "radial":
            return build_radial_grid(
                g["r0"], g["r_max"], g["n"], angular_mode=g["angular_mode"],
                sponge_cells=g["sponge_cells"],
                sponge_strength=g["sponge_strength"])
        if g["mode"] == "cartesian":
            o = cfg["obstacle"]
            params = _floats(o["params"], "obstacle params")
            if o["kind"] == "sphere":
                obs = Obstacle.sphere(*params)
            elif o["kind"] == "ellipsoid":
                obs = Obstacle.ellipsoid(*params)
            else:
                raise ConfigError("unknown obstacle kind %r" % o["kind"])
            return build_masked_grid(
                obs, g["extent"], g["n"], sponge_cells=g["sponge_cells"],
                sponge_strength=g["sponge_strength"])
        raise ConfigError("unknown grid mode %r" % g["mode"])

    @staticmethod
    def _build_spec(nf):
        if nf["kind"] == "scalar_q0":
            return NullFormSpec.scalar_q0()
        if nf["kind"] == "linear":
            return NullFormSpec.linear(int(nf["components"]))
        if nf["kind"] == "custom":
            terms = []
            for line in nf["terms"].splitlines():
                line = line.strip()
                if not line:
                    continue
                toks = line.split()
                if len(toks) != 5:
                    raise ConfigError(
                        "custom term needs 'i j k coeff form': %r" % line)
                try:
                    terms.append((int(toks[0]), int(toks[1]), int(toks[2]),
                                  float(toks[3]), toks[4]))
                except ValueError:
                    raise ConfigError("bad custom term: %r" % line)
            return NullFormSpec(int(nf["components"]), terms)
        raise ConfigError("unknown nullform kind %r" % nf["kind"])

    def _build_family(self, d):
        if d["family"] != "bump":
            raise ConfigError("unknown data family %r" % d["family"])
        self.eps = float(d["eps"])
        if self.eps < 0:
            raise ConfigError("eps must be >= 0")
        return picard.bump_data_family(self.grid, center=d["center"],
                                       width=d["width"],
                                       velocity=d["velocity"])

    def data(self, eps=None):
        return self.family(self.eps if eps is None else eps)

    def summary_header(self, subcommand):
        return {
            "schema_version": SCHEMA_VERSION,
            "subcommand": subcommand,
            "seed": self.seed,
            "config": self.raw,
        }


def _say(quiet, msg):
    if not quiet:
        print(msg)


def cmd_verify_geometry(ec, out, quiet):
    g = ec.raw["geometry"]
    rng = np.random.default_rng(ec.seed)
    n = int(g["samples"])
    extent = float(g["extent"])
    t = rng.uniform(-extent, extent, size=n)
    x = rng.normal(size=(n, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x *= rng.uniform(0.0, extent, size=(n, 1))

    p = penrose.MinkowskiPoint(t, x)
    back = penrose.from_einstein(penrose.to_einstein(p))
    scale = 1.0 + np.abs(p.t) + p.r
    round_trip = float(np.max(np.maximum(
        np.abs(back.t - p.t),
        np.max(np.abs(back.x - p.x), axis=-1)) / scale))

    T, R = penrose.forward_tr(t, p.r)
    om = penrose.conformal_factor_tr(t, p.r)
    om2 = np.cos(T) + np.cos(R)
    dual = float(np.max(np.abs(om - om2) / np.abs(om)))

    residuals = {}
    cases = {
        "mode1": (lambda T, X: np.cos(0.7 * T) * X[..., 0],
                  lambda T, X: 3.51 * np.cos(0.7 * T) * X[..., 0]),
        "mode2": (lambda T, X: np.sin(1.1 * T) * X[..., 1] * X[..., 2],
                  lambda T, X: 7.79 * np.sin(1.1 * T) * X[..., 1] * X[..., 2]),
        "mode2b": (lambda T, X: np.cos(0.5 * T)
                   * (X[..., 0] ** 2 - X[..., 3] ** 2),
                   lambda T, X: 8.75 * np.cos(0.5 * T)
                   * (X[..., 0] ** 2 - X[..., 3] ** 2)),
    }
    x0 = np.array([1.1, -0.6, 1.4])
    for name, (phi, phiw) in cases.items():
        res = [abs(float(penrose.intertwine_residual(phi, phiw, 0.7, x0, h)))
               for h in (0.08, 0.04, 0.02)]
        orders = [float(np.log2(res[m] / res[m + 1])) for m in range(2)]
        residuals[name] = {"residuals": res, "orders": orders}

    summary = ec.summary_header("verify-geometry")
    summary["results"] = {
        "samples": n,
        "max_round_trip_rel": round_trip,
        "max_conformal_dual_rel": dual,
        "intertwine": residuals,
    }
    gridio.write_json(os.path.join(out, "geometry.json"), summary)
    _say(quiet, "round-trip %.3e  conformal dual %.3e" % (round_trip, dual))
    return summary


def _fit_params(ec):
    f = ec.raw["fit"]
    window = _floats(f["window"], "fit window")
    if len(window) != 2 or not window[0] < window[1]:
        raise ConfigError("fit window needs two increasing values")
    if f["model"] not in ("exponential", "power"):
        raise ConfigError("unknown fit model %r" % f["model"])
    return f["model"], tuple(window), float(f["local_radius"])


def _write_final_snapshot(ec, out, traj, name):
    if not ec.raw["output"]["snapshots"]:
        return
    fields = {"u": traj.u[-1]}
    if traj.v is not None:
        fields["v"] = traj.v[-1]
    gridio.write_snapshot(os.path.join(out, name), traj.grid,
                          float(traj.times[-1]), fields)


def cmd_run_linear(ec, out, quiet):
    model, window, radius = _fit_params(ec)
    data = ec.data()
    traj = solver.solve_linear(data, None, ec.t_end, dt=ec.dt,
                               stride=ec.stride)
    times, energies = traj.local_energy_series(radius)
    fit = solver.fit_decay((times, energies), model, window=window)
    _say(quiet, "decay rate %.4f residual %.4f" % (fit.rate, fit.residual))

    summary = ec.summary_header("run-linear")
    summary["results"] = {
        "t_end": ec.t_end,
        "local_radius": radius,
        "fit": {
            "model": fit.model,
            "rate": fit.rate,
            "amplitude": fit.amplitude,
            "window": list(fit.window),
            "residual": fit.residual,
        },
    }
    gridio.write_json(os.path.join(out, "linear.json"), summary)
    gridio.write_csv(os.path.join(out, "local_energy.csv"),
                     ["t", "local_energy"], zip(times, energies))
    _write_final_snapshot(ec, out, traj, "linear_final.nwb")
    return summary


def cmd_run_nonlinear(ec, out, quiet):
    model, window, radius = _fit_params(ec)
    sol, report = picard.picard_solve(
        ec.data(), ec.spec, ec.t_end, dt=ec.dt, tol=ec.tol,
        max_iter=ec.max_iter)
    _say(quiet, "converged in %d iterations (last residual %.3e)"
         % (report.iterations, report.residuals[-1]))
    fit = picard.measure_sup_decay(sol, window=window)

    summary = ec.summary_header("run-nonlinear")
    summary["results"] = {
        "iterations": report.iterations,
        "converged": report.converged,
        "residuals": report.residuals,
        "ratios": report.ratios,
        "boundary_max": sol.boundary_max(),
        "sup_fit": {
            "model": fit.model,
            "rate": fit.rate,
            "amplitude": fit.amplitude,
            "window": list(fit.window),
            "residual": fit.residual,
        },
    }
    gridio.write_json(os.path.join(out, "nonlinear.json"), summary)
    gridio.write_csv(os.path.join(out, "sup_series.csv"), ["t", "sup"],
                     zip(sol.sup_times, sol.sup_values))
    gridio.write_csv(os.path.join(out, "residuals.csv"),
                     ["iteration", "residual"],
                     enumerate(report.residuals, start=1))
    _write_final_snapshot(ec, out, sol.trajectory, "nonlinear_final.nwb")
    return summary


def _run_scan(ec):
    eps_list = _floats(ec.raw["scan"]["eps"], "scan eps")
    return eps_list, picard.smallness_scan(
        ec.family, ec.spec, eps_list, ec.t_end, dt=ec.dt, tol=ec.tol,
        max_iter=ec.max_iter, threads=ec.threads)


def cmd_scan_smallness(ec, out, quiet):
    eps_list, rows = _run_scan(ec)
    table = []
    for row in rows:
        table.append({
            "eps": row["eps"],
            "converged": row["converged"],
            "iterations": row["iterations"],
            "final_residual": row["final_residual"],
            "final_ratio": row["final_ratio"],
        })
        _say(quiet, "eps %.3e  converged %s  iterations %d"
             % (row["eps"], row["converged"], row["iterations"]))

    summary = ec.summary_header("scan-smallness")
    summary["results"] = {"rows": table}
    gridio.write_json(os.path.join(out, "scan.json"), summary)
    gridio.write_csv(
        os.path.join(out, "scan.csv"),
        ["eps", "converged", "iterations", "final_residual", "final_ratio"],
        [(r["eps"], r["converged"], r["iterations"], r["final_residual"],
          r["final_ratio"]) for r in table])
    return summary


def cmd_estimate_report(ec, out, quiet):
    rep = ec.raw["report"]
    sup_window = _floats(rep["sup_window"], "sup window")
    if len(sup_window) != 2:
        raise ConfigError("sup_window needs two values")
    deltas = _floats(rep["deltas"], "delta")
    time_stride = int(rep["time_stride"])

    _, rows = _run_scan(ec)
    reports = norms.estimate_ratio_report(
        rows, sup_window=tuple(sup_window), time_stride=time_stride)
    if not reports:
        raise FitError("no converged scan entries to report on")

    columns = ["eps"] + list(reports[0].values)
    csv_rows = [[r.metadata["eps"]] + [r[k] for k in r.values]
                for r in reports]
    spreads = norms.ratio_spreads(reports)
    for r in reports:
        _say(quiet, "eps %.3e  " % r.metadata["eps"] + "  ".join(
            "%s %.3e" % (k, r[k]) for k in norms.RATIO_NAMES))

    # truncation sweep on the largest converged entry
    last = max((r for r in rows if r["converged"]), key=lambda r: r["eps"])
    samples = norms.forcing_cylinder_samples(
        last["solution"].trajectory, ec.spec, time_stride=time_stride)
    sweep = norms.delta_sweep(samples, deltas)

    summary = ec.summary_header("estimate-report")
    summary["results"] = {
        "ratio_spreads": spreads,
        "rows": [dict(r.values, eps=r.metadata["eps"]) for r in reports],
        "delta_sweep": {"eps": last["eps"], "deltas": deltas,
                        "values": list(sweep)},
    }
    gridio.write_json(os.path.join(out, "estimates.json"), summary)
    gridio.write_csv(os.path.join(out, "estimates.csv"), columns, csv_rows)
    gridio.write_csv(os.path.join(out, "delta_sweep.csv"),
                     ["delta", "tip_norm"], zip(deltas, sweep))
    return summary


def cmd_check_compat(ec, out, quiet):
    order = int(ec.raw["compat"]["order"])
    data = ec.data()
    residuals = check_compatibility(data, ec.spec, order)
    for j, res in enumerate(residuals):
        _say(quiet, "order %d boundary residual %.3e" % (j, res))

    summary = ec.summary_header("check-compat")
    summary["results"] = {
        "order": order,
        "boundary_residuals": [float(r) for r in residuals],
    }
    gridio.write_json(os.path.join(out, "compat.json"), summary)
    return summary


COMMANDS = {
    "verify-geometry": cmd_verify_geometry,
    "run-linear": cmd_run_linear,
    "run-nonlinear": cmd_run_nonlinear,
    "scan-smallness": cmd_scan_smallness,
    "estimate-report": cmd_estimate_report,
    "check-compat": cmd_check_compat,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nullwave",
        description="Verification experiments for null-form waves outside "
                    "a convex obstacle.")
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="INI experiment configuration")
    parser.add_argument("--out", default=".", help="artifact directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (overrides [run] seed)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for scan entries")
    parser.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.subcommand)
        seed = args.seed if args.seed is not None else cfg["run"]["seed"]
        if seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        cfg["run"]["seed"] = int(seed)
        if args.threads < 1:
            raise ConfigError("threads must be >= 1")
        ec = ExperimentConfig(cfg, seed, args.threads)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    try:
        COMMANDS[args.subcommand](ec, args.out, args.quiet)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as e:
        diag = ec.summary_header(args.subcommand)
        diag["error"] = {"type": type(e).__name__, "message": str(e)}
        if isinstance(e, NoConvergence):
            diag["error"]["iterations"] = e.iterations
            diag["error"]["residuals"] = e.residuals
        gridio.write_json(os.path.join(args.out, "error.json"), diag)
        print("numerical failure: %s" % e, file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
