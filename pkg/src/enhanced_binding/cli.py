"""Command line front end: ``enhanced-binding <command> --config run.ini``.

Commands: lambda0, eta2, sigma0, certify, sweep, selftest. Each writes a
JSON report (with the resolved configuration embedded) to the output
directory; ``sweep`` also writes a CSV table.

Exit codes: 0 success, 1 certificate or selftest failure, 2 bad
configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import field as fld
from . import oracles, potential, schrodinger, selfenergy, threshold
from .numerics import FixedPointError, QuadratureError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("lambda0", "eta2", "sigma0", "certify", "sweep", "selftest")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    potential: dict = field(default_factory=lambda: {"kind": "indicator", "depth": 1.0, "radius": 1.0})
    cutoff: dict = field(default_factory=lambda: {"variant": "sharp", "radius": 1.0, "width": 0.2, "amplitude": 1.0})
    alphas: list = field(default_factory=lambda: [1e-2])
    gamma_reg: float | None = None
    gamma_policy: tuple = (0.1, 2.0, 1e-9)
    probes: list = field(default_factory=lambda: [0.9, 1.0])
    lam: float | None = None
    evaluator: str = "direct"
    radial_order: int = 20
    spin: tuple = (1.0, 0.0)
    g: float = 1.0
    tol: float = 1e-8
    seed: int = 0
    threads: int = 1
    out: str = "."

    def build_potential(self):
        p = self.potential
        kind = p["kind"]
        if kind == "indicator":
            return potential.indicator_well(p["depth"], p["radius"])
        if kind == "smooth":
            return potential.smooth_well(p["depth"], p["radius"])
        if kind == "tabulated":
            return potential.load_tabulated(p["path"])
        raise ConfigError(f"unknown potential kind {kind!r}")

    def build_cutoff(self):
        c = self.cutoff
        return fld.CutoffProfile(c["variant"], c["radius"], c["width"], c["amplitude"])

    def resolved(self):
        d = asdict(self)
        d["spin"] = [str(complex(s)) for s in self.spin]
        return d


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Parse and validate an INI file with sections potential, cutoff and run."""
    cfg = RunConfig()
    if path is not None:
        cp = configparser.ConfigParser()
        try:
            if not cp.read(path):
                raise ConfigError(f"cannot read config file {path!r}")
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        base = Path(path).resolve().parent
        try:
            if cp.has_section("potential"):
                s = cp["potential"]
                cfg.potential = {
                    "kind": s.get("kind", "indicator"),
                    "depth": s.getfloat("depth", 1.0),
                    "radius": s.getfloat("radius", 1.0),
                }
                if "path" in s:
                    cfg.potential["path"] = str((base / s["path"]).resolve())
            if cp.has_section("cutoff"):
                s = cp["cutoff"]
                cfg.cutoff = {
                    "variant": s.get("variant", "sharp"),
                    "radius": s.getfloat("radius", 1.0),
                    "width": s.getfloat("width", 0.2),
                    "amplitude": s.getfloat("amplitude", 1.0),
                }
            if cp.has_section("run"):
                s = cp["run"]
                if "alphas" in s:
                    cfg.alphas = _floats(s["alphas"])
                elif "alpha" in s:
                    cfg.alphas = [s.getfloat("alpha")]
                if "gamma_reg" in s:
                    cfg.gamma_reg = s.getfloat("gamma_reg")
                if "gamma_policy" in s:
                    cfg.gamma_policy = tuple(_floats(s["gamma_policy"]))
                if "probes" in s:
                    cfg.probes = _floats(s["probes"])
                if "lambda" in s:
                    cfg.lam = s.getfloat("lambda")
                cfg.evaluator = s.get("evaluator", cfg.evaluator)
                cfg.radial_order = s.getint("radial_order", cfg.radial_order)
                if "spin" in s:
                    cfg.spin = tuple(complex(x) for x in s["spin"].replace(",", " ").split())
                cfg.g = s.getfloat("g", cfg.g)
                cfg.tol = s.getfloat("tol", cfg.tol)
                cfg.seed = s.getint("seed", cfg.seed)
                cfg.threads = s.getint("threads", cfg.threads)
                cfg.out = s.get("out", cfg.out)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad value in {path}: {exc}") from exc
    for k, v in (overrides or {}).items():
        if v is not None:
            setattr(cfg, k, v)
    _check(cfg)
    return cfg


def _check(cfg: RunConfig):
    if cfg.potential.get("kind") not in ("indicator", "smooth", "tabulated"):
        raise ConfigError(f"unknown potential kind {cfg.potential.get('kind')!r}")
    if cfg.potential["kind"] == "tabulated":
        if "path" not in cfg.potential or not Path(cfg.potential["path"]).is_file():
            raise ConfigError("tabulated potential file not found")
    elif cfg.potential["depth"] <= 0 or cfg.potential["radius"] <= 0:
        raise ConfigError("potential depth and radius must be positive")
    if cfg.cutoff["variant"] not in ("sharp", "bump"):
        raise ConfigError(f"unknown cutoff variant {cfg.cutoff['variant']!r}")
    if not cfg.alphas or any(a <= 0 for a in cfg.alphas) or len(set(cfg.alphas)) != len(cfg.alphas):
        raise ConfigError("alpha values must be distinct and positive")
    if len(cfg.gamma_policy) != 3:
        raise ConfigError("gamma_policy needs three numbers: scale, power, floor")
    if cfg.gamma_reg is not None and not 0 < cfg.gamma_reg < 1:
        raise ConfigError("gamma_reg must lie in (0, 1)")
    if cfg.tol <= 0:
        raise ConfigError("tolerances must be positive")
    if cfg.evaluator not in ("direct", "breakdown"):
        raise ConfigError(f"unknown evaluator {cfg.evaluator!r}")
    if cfg.threads < 1 or cfg.radial_order < 2:
        raise ConfigError("threads and radial_order must be positive")
    if len(cfg.spin) != 2:
        raise ConfigError("spin needs two components")
    try:
        cfg.build_cutoff()
        selfenergy.spinor(*cfg.spin)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------- output


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def write_report(out: Path, name: str, cfg: RunConfig, body: dict):
    doc = {"command": name, "config": cfg.resolved(), "result": body}
    path = out / f"{name}.json"
    path.write_text(json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n")
    return path


def _fmt(x):
    return repr(float(x))


def write_sweep_csv(path: Path, report: threshold.ThresholdReport):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "lambda_c", "predicted_bound"])
        for a, lc, pb in zip(report.alphas, report.lambda_c, report.predicted_bound):
            w.writerow([_fmt(a), _fmt(lc), _fmt(pb)])


# ---------------------------------------------------------------- commands


def _gamma(cfg, alpha):
    if cfg.gamma_reg is not None:
        return cfg.gamma_reg
    return threshold.GammaPolicy(*cfg.gamma_policy)(alpha)


def cmd_lambda0(cfg):
    W = cfg.build_potential()
    lam0 = schrodinger.critical_coupling(W)
    body = {"potential": W.name, "lambda0": lam0}
    if cfg.potential["kind"] == "indicator":
        exact = oracles.square_well_critical(cfg.potential["depth"], cfg.potential["radius"])
        body["closed_form"] = exact
        body["relative_error"] = abs(lam0 / exact - 1)
    return body, True


def cmd_eta2(cfg):
    W = cfg.build_potential()
    cut = cfg.build_cutoff()
    lam0 = schrodinger.critical_coupling(W)
    dp = potential.d_functional(potential.positive_part(W))
    dsq = potential.d_functional(potential.squared(W))
    cw = potential.c_w_constant(lam0, W)
    body = {
        "lambda0": lam0,
        "d_W_plus": {"double_integral": dp.double_integral, "radial": dp.radial, "value": dp.value},
        "d_W_squared": {"double_integral": dsq.double_integral, "radial": dsq.radial, "value": dsq.value},
        "C_W": cw,
        "eta2": selfenergy.eta_squared(cut, cw),
        "eta2_C0": selfenergy.eta_squared(cut, 0.0),
        "theta_norm2": selfenergy.theta_norm2(cut, cw),
    }
    if cut.variant == "sharp" and cut.amplitude == 1.0:
        body["eta2_C0_closed_form"] = oracles.eta2_sharp_closed_form(cut.radius, 0.0)
        body["eta2_closed_form"] = oracles.eta2_sharp_closed_form(cut.radius, cw)
    return body, True


def cmd_sigma0(cfg):
    cut = cfg.build_cutoff()
    rows = []
    for a in cfg.alphas:
        r = selfenergy.sigma0_truncated(a, cut, cfg.g)
        rows.append({"alpha": a, "sigma0": r.energy, "inf_L": r.inf_L, "gap": r.gap,
                     "iterations": r.iterations})
    return {"rows": rows, "note": threshold.TRUNCATION_NOTE}, True


def cmd_certify(cfg):
    W = cfg.build_potential()
    a = cfg.alphas[0]
    trial = threshold.assemble_trial(W, a, _gamma(cfg, a), cfg.build_cutoff(), cfg.spin, cfg.g,
                                     cfg.radial_order)
    lam = trial.lambda0 if cfg.lam is None else cfg.lam
    cert = threshold.binding_certificate(W, a, lam=lam, trial=trial)
    br = cert.breakdown
    body = {
        "alpha": a,
        "gamma_reg": trial.gamma_reg,
        "lambda": lam,
        "lambda0": trial.lambda0,
        "C_W": trial.c_w,
        "margin": cert.margin,
        "verdict": "bound" if cert.verdict else "not certified",
        "breakdown": {**br.terms, "total": br.total, "norm2": br.norm2, "margin": br.margin,
                      "sigma0": br.sigma0, "eta2": br.eta2,
                      "theta_field_ratio": br.theta_field_ratio,
                      "theta_schrodinger_bound": br.theta_schrodinger_bound},
        "direct": {"value": br.direct, "margin": br.direct_margin, "norm2": br.direct_norm2,
                   "minus_breakdown": br.difference},
        "note": cert.note,
    }
    return body, cert.verdict


def cmd_sweep(cfg, out: Path):
    W = cfg.build_potential()
    if cfg.gamma_reg is not None:
        policy = threshold.GammaPolicy.constant(cfg.gamma_reg)
    else:
        policy = threshold.GammaPolicy(*cfg.gamma_policy)
    rep = threshold.alpha_sweep(W, cfg.alphas, policy, cfg.build_cutoff(), cfg.evaluator,
                                cfg.probes, cfg.threads, cfg.spin, cfg.g)
    write_sweep_csv(out / "sweep.csv", rep)
    body = {
        "lambda0": rep.lambda0,
        "C_W": rep.c_w,
        "eta2": rep.eta2,
        "evaluator": rep.evaluator,
        "alphas": rep.alphas,
        "gamma_regs": rep.gamma_regs,
        "lambda_c": rep.lambda_c,
        "predicted_bound": rep.predicted_bound,
        "shift_over_alpha": rep.shifts,
        "fitted_slope": rep.fitted_slope,
        "fitted_slope_over_eta2": rep.fitted_slope / rep.eta2,
        "mechanistic_slope": rep.mechanistic_slope,
        "extrapolated_lambda0": rep.extrapolated_lambda0,
        "monotone": rep.monotone,
        "all_below_threshold": rep.all_below_threshold,
        "flags": rep.flags,
        "probe_margins": rep.probe_margins,
        "note": rep.note,
    }
    return body, rep.complete and rep.all_below_threshold


def selftest_checks(cfg) -> list[dict]:
    """Fast invariant suite on the reference configuration."""
    rng = np.random.default_rng(cfg.seed)
    checks = []

    def add(name, value, target, tol, relative=True):
        err = abs(value - target) / (abs(target) if relative and target else 1.0)
        checks.append({"name": name, "value": value, "target": target, "error": err,
                       "tol": tol, "passed": bool(err <= tol)})

    W = potential.indicator_well()
    cut = fld.CutoffProfile()
    lam0 = schrodinger.critical_coupling(W)
    add("lambda0_unit_well", lam0, np.pi**2 / 4, 1e-6)
    add("eta2_C0_sharp", selfenergy.eta_squared(cut, 0.0), 2 / (3 * np.pi) * np.log(2), 1e-8)
    cw = potential.c_w_constant(lam0, W)
    add("C_W_unit_well", cw, np.pi**4 / 32, 1e-6)

    grid = selfenergy.PhotonGrid(cut)
    a, b = selfenergy.random_spinor(rng)
    th = [selfenergy.theta_i(i, a, b, cw, grid) for i in range(3)]
    eta2 = selfenergy.eta_squared(cut, cw)
    w = grid.dispersion + cw
    for i in range(3):
        add(f"theta_{i + 1}_weighted_norm", th[i].weighted_norm2(w), eta2, 1e-9)
    off = max(abs(th[i].inner(th[j])) for i in range(3) for j in range(3) if i != j)
    add("theta_orthogonality", off, 0.0, 1e-12, relative=False)
    vals, scales = selfenergy.orthogonality_kphi_theta(a, b, 1e-2, cw, grid)
    add("kphi_theta_orthogonality", float(np.max(np.abs(vals) / scales)), 0.0, 1e-9, relative=False)

    alpha = 1e-2
    s0 = selfenergy.sigma0_truncated(alpha, cut).energy
    add("sigma0_vs_dense_oracle", s0, oracles.sigma0_dense(alpha, cut), cfg.tol)
    add("inf_L_closed_form", -selfenergy.phi_norm1_2(alpha, cut),
        -alpha * 2 / np.pi * (np.log(2) - 0.5), 1e-8)

    tr0 = threshold.assemble_trial(W, 0.0, lambda0=lam0, c_w=cw)
    br0 = threshold.quadratic_form_breakdown(tr0, 0.9 * lam0)
    checks.append({"name": "decoupled_margin_nonnegative", "value": br0.direct_margin,
                   "target": 0.0, "tol": 1e-10, "passed": bool(br0.direct_margin >= -1e-10)})

    tr = threshold.assemble_trial(W, alpha, lambda0=lam0, c_w=cw)
    br = threshold.quadratic_form_breakdown(tr, lam0)
    add("bookkeeping_identity", br.bookkeeping_residual(), 0.0, 1e-12 * abs(br.total), relative=False)
    G = tr.particle.moments["grad2"]
    add("direct_minus_breakdown", br.difference, -2 * alpha * G * eta2 + 2 * alpha**2 * G * eta2**2, 1e-6)
    add("norm2_formula_vs_quadrature", tr.norm2_quadrature(), tr.norm2_formula(), 1e-10)
    checks.append({"name": "certificate_at_lambda0", "value": br.direct_margin, "target": 0.0,
                   "tol": 0.0, "passed": bool(br.direct_margin < 0)})
    return checks


def cmd_selftest(cfg):
    checks = selftest_checks(cfg)
    ok = all(c["passed"] for c in checks)
    return {"checks": checks, "passed": ok}, ok


# ---------------------------------------------------------------- entry point


def build_parser():
    p = argparse.ArgumentParser(prog="enhanced-binding", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="INI file with sections potential, cutoff, run")
    p.add_argument("--out", help="output directory (default: run.out or .)")
    p.add_argument("--threads", type=int, help="worker threads for sweeps")
    p.add_argument("--seed", type=int, help="seed for randomised checks")
    p.add_argument("--tol", type=float, help="tolerance override")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, {"out": args.out, "threads": args.threads,
                                        "seed": args.seed, "tol": args.tol})
        if args.command == "sweep" and max(cfg.alphas) / min(cfg.alphas) < 10**1.5:
            raise ConfigError("sweep needs an alpha ladder spanning at least 1.5 decades")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "sweep":
            body, ok = cmd_sweep(cfg, out)
        else:
            body, ok = globals()[f"cmd_{args.command}"](cfg)
    except (QuadratureError, FixedPointError, schrodinger.BracketError,
            schrodinger.NoBindingError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    path = write_report(out, args.command, cfg, body)
    print(f"{args.command}: {'ok' if ok else 'FAILED'} -> {path}")
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
