"""File-driven front end: JSON config in, JSON report and CSV tables out.

The config declares the search region, the signal and proposal densities (by
family tag and parameter map), and one of five modes:

- ``with_background``: two-sample inference; fixed proposal runs the Z1 test,
  a parametric proposal (declared with ``box``/``init``) runs Z2.
- ``no_background``: conservative Z3 inference with a bumped baseline.
- ``sensitivity``: the lambda scan, writing proposal curves and per-lambda
  reports.
- ``lrt``: plugged-in likelihood-ratio fit referred to chibar2(0,1).
- ``simulate``: a grid of Monte Carlo scenarios.

All outputs land under ``--out``: always ``report.json`` (config echo
included, floats at full precision), plus mode-specific CSV tables.  Given
identical config, inputs, and seed the outputs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .compensator import (
    InferenceReport,
    estimate_two_sample,
    score_geometry,
    test_z1,
)
from .density import (
    DensityModel,
    SearchRegion,
    exponential_logscale,
    gaussian_signal_logscale,
    gaussian_tail,
    make_bump_mixture,
    mixture,
    pareto1,
    power_law_shifted,
    truncated_gamma,
    truncated_gaussian,
    uniform,
)
from .errors import (
    ConfigError,
    EmptyFile,
    ParseError,
    SigcompError,
    ValueOutsideRegion,
)
from .lrt import chi2bar01_cdf, fit_lrt
from .montecarlo import McScenario, default_workers, run_grid
from .nobkg import estimate_theta0, sensitivity_scan, test_z3
from .parametric import delta_method_pieces, fit_mle, standard_family, test_z2

__all__ = ["read_events", "run", "main"]

MODES = ("with_background", "no_background", "lrt", "simulate", "sensitivity")


# --- event files -----------------------------------------------------------

def read_events(path, transform: str = "identity") -> np.ndarray:
    """Read one numeric value per line; '#' comments and blank lines ignored."""
    if transform not in ("identity", "log"):
        raise ConfigError(f"unknown transform {transform!r}")
    path = Path(path)
    values = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                value = float(line)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: not a number: {line!r}",
                                 line=lineno) from exc
            if not math.isfinite(value):
                raise ParseError(f"{path}:{lineno}: non-finite value {line!r}",
                                 line=lineno)
            if transform == "log":
                if value <= 0.0:
                    raise ParseError(
                        f"{path}:{lineno}: value {value} not log-transformable",
                        line=lineno)
                value = math.log(value)
            values.append(value)
    if not values:
        raise EmptyFile(f"{path} contains no values")
    return np.asarray(values, dtype=float)


def _check_region(values: np.ndarray, region: SearchRegion, label: str):
    outside = ~region.contains(values)
    if outside.any():
        raise ValueOutsideRegion(
            f"{int(outside.sum())} of {values.size} {label} events outside "
            f"[{region.lo}, {region.hi}]")


# --- config parsing --------------------------------------------------------

def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ConfigError(f"missing {key!r} in {where}")
    return block[key]


def _build_density(decl: dict, region: SearchRegion) -> DensityModel:
    if not isinstance(decl, dict) or "family" not in decl:
        raise ConfigError("density declarations need a 'family' tag")
    tag = decl["family"]
    params = decl.get("params", {})
    try:
        if tag == "uniform":
            return uniform(region)
        if tag == "truncated_gamma":
            return truncated_gamma(region, params["shape"], params["rate"])
        if tag == "pareto1":
            return pareto1(region, params["slope"])
        if tag == "truncated_gaussian":
            return truncated_gaussian(region, params["mu"], params["sigma"])
        if tag == "power_law_shifted":
            return power_law_shifted(region, params["slope"])
        if tag == "exponential_logscale":
            return exponential_logscale(region, params["rate"])
        if tag == "gaussian_signal_logscale":
            return gaussian_signal_logscale(region, params["kappa"])
        if tag == "gaussian_tail":
            return gaussian_tail(region, params["width"])
        if tag == "mixture":
            weights = _require(decl, "weights", "mixture declaration")
            comps = [_build_density(c, region)
                     for c in _require(decl, "components", "mixture declaration")]
            return mixture(weights, comps)
        if tag == "bump_mixture":
            base = _build_density(_require(decl, "baseline", "bump_mixture"), region)
            return make_bump_mixture(base, decl["lambda"], decl["mu1"],
                                     decl["mu2"], decl["sigma0"], region)
    except KeyError as exc:
        raise ConfigError(f"family {tag!r} is missing parameter {exc}") from exc
    raise ConfigError(f"unknown density family {tag!r}")


def _build_family(decl: dict, region: SearchRegion):
    tag = _require(decl, "family", "parametric declaration")
    box = _require(decl, "box", f"parametric family {tag!r}")
    init = _require(decl, "init", f"parametric family {tag!r}")
    try:
        return standard_family(tag, region, box, init,
                               grad_mode=decl.get("grad"),
                               fd_step=decl.get("fd_step"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _is_parametric(decl: dict) -> bool:
    return isinstance(decl, dict) and "box" in decl


# --- report serialization ---------------------------------------------------

def _sci(p: float) -> str:
    return f"{p:.3e}"


def _report_payload(rep: InferenceReport) -> dict:
    return {
        "method": rep.method_tag,
        "estimate": rep.estimate,
        "std_error": rep.std_error,
        "statistic": rep.statistic,
        "p_value": rep.p_value,
        "p_value_sci": _sci(rep.p_value),
        "ci_lo": rep.ci_lo,
        "ci_hi": rep.ci_hi,
        "level": rep.level,
        "diagnostics": rep.diagnostics,
    }


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)
    path.write_text(text + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list, rows: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# --- mode runners ------------------------------------------------------------

def _run_with_background(config, region, signal, physics, background):
    decl = _require(config, "proposal", "config")
    level = config.get("level", 0.05)
    if _is_parametric(decl):
        family = _build_family(decl, region)
        mle = fit_mle(family, background)
        geometry = score_geometry(signal, family.model(mle.beta_hat))
        est = estimate_two_sample(geometry, physics, background)
        pieces = delta_method_pieces(family, mle.beta_hat, geometry,
                                     physics, background)
        rep = test_z2(pieces, est, level, at_boundary=mle.at_boundary)
        extra = {"beta_hat": [float(b) for b in mle.beta_hat],
                 "mle_converged": mle.converged}
    else:
        proposal = _build_density(decl, region)
        geometry = score_geometry(signal, proposal)
        est = estimate_two_sample(geometry, physics, background)
        rep = test_z1(est, level)
        extra = {}
    payload = _report_payload(rep)
    payload.update(extra)
    payload["n"] = int(est.n)
    payload["m"] = int(est.m)
    return payload, []


def _bump_tuple(block) -> tuple:
    bump = _require(block, "bump", "bump block")
    return (_require(bump, "mu1", "bump"), _require(bump, "mu2", "bump"),
            _require(bump, "sigma0", "bump"))


def _run_no_background(config, region, signal, physics):
    block = _require(config, "no_background", "config")
    family = _build_family(_require(block, "baseline", "no_background"), region)
    lam = _require(block, "lambda", "no_background")
    level = config.get("level", 0.05)
    est = estimate_theta0(family, lam, _bump_tuple(block), physics, signal)
    rep = test_z3(est, level)
    payload = _report_payload(rep)
    payload["alpha_hat"] = [float(a) for a in est.alpha_hat]
    payload["lambda"] = est.lambda_star
    payload["n"] = int(est.n)
    return payload, []


def _run_sensitivity(config, region, signal, physics, out_dir):
    block = _require(config, "sensitivity", "config")
    family = _build_family(_require(block, "baseline", "sensitivity"), region)
    lambdas = _require(block, "lambdas", "sensitivity")
    level = config.get("level", 0.05)
    points = int(block.get("grid_points", 257))
    x_grid = np.linspace(region.lo, region.hi, points)
    grid = sensitivity_scan(family, _bump_tuple(block), lambdas, physics,
                            x_grid, signal, level=level)
    curve_path = out_dir / "sensitivity_curves.csv"
    header = ["x"] + [f"lambda_{lam:g}" for lam in grid.lambdas]
    rows = [[repr(float(x))] + [repr(float(c)) for c in grid.curves[:, i]]
            for i, x in enumerate(grid.x_grid)]
    _write_csv(curve_path, header, rows)
    report_path = out_dir / "sensitivity_reports.csv"
    rep_header = ["lambda", "theta0_hat", "std_error", "statistic", "p_value"]
    rep_rows = [[repr(float(lam)), repr(rep.estimate), repr(rep.std_error),
                 repr(rep.statistic), repr(rep.p_value)]
                for lam, rep in zip(grid.lambdas, grid.reports)]
    _write_csv(report_path, rep_header, rep_rows)
    payload = {
        "alpha_hat": [float(a) for a in grid.alpha_hat],
        "lambdas": [float(v) for v in grid.lambdas],
        "reports": [_report_payload(rep) for rep in grid.reports],
    }
    return payload, [curve_path.name, report_path.name]


def _run_lrt(config, region, signal, physics):
    decl = _require(config, "lrt", "config")
    proposal = _build_density(_require(decl, "proposal", "lrt block"), region)
    fit = fit_lrt(signal, proposal, physics)
    p_value = 1.0 - chi2bar01_cdf(fit.lrt_stat)
    payload = {
        "method": "LRT",
        "estimate": fit.eta_tilde_hat_c,
        "estimate_unconstrained": fit.eta_tilde_hat,
        "statistic": fit.lrt_stat,
        "p_value": p_value,
        "p_value_sci": _sci(p_value),
        "loglik_at_0": fit.loglik_at_0,
        "loglik_at_c": fit.loglik_at_c,
        "boundary_flag": fit.boundary_flag,
        "n": int(np.asarray(physics).size),
    }
    return payload, []


def _build_scenario(decl: dict, region, signal, background, default_level,
                    default_seed, index) -> McScenario:
    method = _require(decl, "method", "scenario")
    cfg = {}
    if method in ("Z1", "LRT"):
        cfg["proposal"] = _build_density(_require(decl, "proposal", "scenario"),
                                         region)
    elif method == "Z2":
        cfg["family"] = _build_family(_require(decl, "proposal", "scenario"),
                                      region)
    elif method == "Z3":
        cfg["family"] = _build_family(_require(decl, "baseline", "scenario"),
                                      region)
        cfg["lambda"] = _require(decl, "lambda", "scenario")
        cfg["bump"] = _bump_tuple(decl)
    return McScenario(
        signal=signal,
        background=background,
        eta=float(decl.get("eta", 0.0)),
        n=int(_require(decl, "n", "scenario")),
        m=int(decl["m"]) if decl.get("m") is not None else None,
        method=method,
        method_config=cfg,
        replicates=int(_require(decl, "replicates", "scenario")),
        level=float(decl.get("level", default_level)),
        seed=int(decl.get("seed", default_seed)),
        name=str(decl.get("name", f"scenario_{index}")),
    )


def _run_simulate(config, region, signal, out_dir, seed, workers):
    block = _require(config, "simulate", "config")
    decls = _require(block, "scenarios", "simulate block")
    level = config.get("level", 0.05)
    background_decl = _require(config, "background", "config (simulate mode)")
    background = _build_density(background_decl, region)
    scenarios = [_build_scenario(d, region, signal, background, level, seed, i)
                 for i, d in enumerate(decls)]
    summaries = run_grid(scenarios, workers)
    grid_path = out_dir / "mc_grid.csv"
    header = ["name", "method", "eta", "n", "m", "lambda", "replicates",
              "level", "seed", "rejection_rate", "mc_se", "mean_estimate",
              "var_estimate", "mean_plugin_variance", "failures"]
    header += [f"stat_q{int(100 * p):02d}" for p in (0.5, 0.9, 0.95, 0.99)]
    rows = []
    written = [grid_path.name]
    for scenario, summary in zip(scenarios, summaries):
        lam = scenario.method_config.get("lambda", "")
        rows.append([
            scenario.name, scenario.method, repr(scenario.eta), scenario.n,
            scenario.m if scenario.m is not None else "", lam,
            scenario.replicates, repr(scenario.level), scenario.seed,
            repr(summary.rejection_rate), repr(summary.mc_se),
            repr(summary.mean_estimate), repr(summary.var_estimate),
            repr(summary.mean_plugin_variance), summary.failures,
            *(repr(summary.statistic_quantiles[p]) for p in (0.5, 0.9, 0.95, 0.99)),
        ])
        if block.get("keep_statistics", False):
            stat_path = out_dir / f"statistics_{scenario.name}.txt"
            stat_path.parent.mkdir(parents=True, exist_ok=True)
            stat_path.write_text(
                "".join(f"{v!r}\n" for v in summary.statistics), encoding="utf-8")
            written.append(stat_path.name)
    _write_csv(grid_path, header, rows)
    payload = {"rows": [
        {"name": s.name, "method": sc.method, "eta": sc.eta, "n": sc.n,
         "m": sc.m, "replicates": sc.replicates,
         "rejection_rate": s.rejection_rate, "mc_se": s.mc_se,
         "mean_estimate": s.mean_estimate, "var_estimate": s.var_estimate,
         "failures": s.failures}
        for sc, s in zip(scenarios, summaries)]}
    return payload, written


# --- orchestration -----------------------------------------------------------

def run(config: dict, physics_path=None, background_path=None,
        out_dir="sigcomp_out", seed=None, workers=1) -> int:
    """Execute one configured analysis; returns the process exit code."""
    mode = _require(config, "mode", "config")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    region_block = _require(config, "region", "config")
    region = SearchRegion(float(_require(region_block, "lo", "region")),
                          float(_require(region_block, "hi", "region")))
    signal = _build_density(_require(config, "signal", "config"), region)
    transform = config.get("transform", "identity")
    seed = int(seed if seed is not None else config.get("seed", 0))
    out_dir = Path(out_dir)

    physics = background = None
    if mode != "simulate":
        if physics_path is None:
            raise ConfigError(f"mode {mode!r} requires --physics")
        physics = read_events(physics_path, transform)
        _check_region(physics, region, "physics")
    if mode == "with_background":
        if background_path is None:
            raise ConfigError("mode 'with_background' requires --background")
        background = read_events(background_path, transform)
        _check_region(background, region, "background-only")

    if mode == "with_background":
        results, tables = _run_with_background(config, region, signal,
                                               physics, background)
    elif mode == "no_background":
        results, tables = _run_no_background(config, region, signal, physics)
    elif mode == "sensitivity":
        results, tables = _run_sensitivity(config, region, signal, physics,
                                           out_dir)
    elif mode == "lrt":
        results, tables = _run_lrt(config, region, signal, physics)
    else:
        results, tables = _run_simulate(config, region, signal, out_dir,
                                        seed, workers)

    payload = {
        "sigcomp_version": __version__,
        "mode": mode,
        # worker count deliberately not echoed: results do not depend on it
        "inputs": {
            "physics": str(physics_path) if physics_path else None,
            "background": str(background_path) if background_path else None,
            "seed": seed,
            "transform": transform,
        },
        "config": config,
        "results": results,
        "tables": tables,
    }
    _write_json(out_dir / "report.json", payload)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sigcomp",
        description="Compensator-based signal detection on event files.")
    parser.add_argument("--config", required=True, help="JSON analysis config")
    parser.add_argument("--physics", help="physics event file (one value per line)")
    parser.add_argument("--background", help="background-only event file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--workers", type=int, default=default_workers(),
                        help="worker processes for simulation campaigns")
    parser.add_argument("--out", default="sigcomp_out",
                        help="output directory (default: sigcomp_out)")
    args = parser.parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": {"code": "ConfigError",
                                    "message": f"cannot read config: {exc}"}}),
              file=sys.stderr)
        return 2
    try:
        return run(config, physics_path=args.physics,
                   background_path=args.background, out_dir=args.out,
                   seed=args.seed, workers=args.workers)
    except SigcompError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}),
              file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1


if __name__ == "__main__":
    sys.exit(main())
