"""Seeded, parallel Monte Carlo calibration campaigns.

A campaign repeatedly draws fresh physics (and, for the two-sample methods,
background-only) samples from a configured truth, runs one inference method
per replicate, and aggregates rejection rates, estimate moments, and
statistic quantiles with Monte Carlo standard errors.

Reproducibility: replicate ``i`` of a campaign with seed ``s`` consumes the
counter-based Philox stream keyed by ``(s, i)``, so results are identical for
any worker count and any execution order.  Parallel execution uses forked
worker processes (shared inputs are immutable); on platforms without fork the
campaign runs serially.

Replicates that fail with an analysis error are counted and excluded from the
rate denominator rather than silently dropped; a campaign aborts only when
more than half of its replicates fail.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from dataclasses import dataclass, field

import numpy as np

from .compensator import estimate_two_sample, score_geometry, test_z1
from .density import DensityModel, FAST_QUAD, QuadratureSpec, mixture, replicate_stream
from .errors import CampaignDegenerate, ConfigError, SigcompError
from .lrt import chi2bar01_cdf, fit_lrt
from .nobkg import estimate_theta0, test_z3
from .parametric import delta_method_pieces, fit_mle, test_z2

__all__ = ["McScenario", "McSummary", "run_campaign", "run_grid"]

QUANTILE_PROBS = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99)

_METHODS = ("Z1", "Z2", "Z3", "LRT")


@dataclass(frozen=True)
class McScenario:
    """One simulation cell: truth, sample sizes, method, and replication.

    ``method_config`` carries the method-specific objects:

    - Z1: ``{"proposal": DensityModel}``
    - Z2: ``{"family": ParametricProposal}``
    - Z3: ``{"family": ParametricProposal, "lambda": float,
           "bump": (mu1, mu2, sigma0)}``
    - LRT: ``{"proposal": DensityModel}``
    """

    signal: DensityModel
    background: DensityModel
    eta: float
    n: int
    m: int | None
    method: str
    method_config: dict
    replicates: int
    level: float = 0.05
    seed: int = 0
    quad: QuadratureSpec = FAST_QUAD
    name: str = ""

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.method in ("Z1", "Z2") and self.m is None:
            raise ConfigError(f"method {self.method} needs a background sample size m")
        if not 0.0 <= self.eta < 1.0:
            raise ConfigError(f"eta must lie in [0, 1), got {self.eta}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.n < 2 or (self.m is not None and self.m < 2):
            raise ConfigError("sample sizes must be >= 2")
        if not 0.0 < self.level < 1.0:
            raise ConfigError("level must lie in (0, 1)")

    def truth(self) -> DensityModel:
        if self.eta == 0.0:
            return self.background
        return mixture([self.eta, 1.0 - self.eta], [self.signal, self.background])


@dataclass(frozen=True)
class McSummary:
    """Aggregates of one campaign over its successful replicates."""

    name: str
    replicates: int
    successes: int
    failures: int
    rejection_rate: float
    mc_se: float
    mean_estimate: float
    var_estimate: float
    mean_plugin_variance: float
    statistic_quantiles: dict
    statistics: np.ndarray = field(repr=False)
    estimates: np.ndarray = field(repr=False)


def _prepare(scenario: McScenario) -> dict:
    """Build and warm every object shared across replicates."""
    prep: dict = {"truth": scenario.truth()}
    prep["truth"].pdf_grid()
    cfg = scenario.method_config
    if scenario.method == "Z1":
        if "proposal" not in cfg:
            raise ConfigError("Z1 scenarios need method_config['proposal']")
        prep["geometry"] = score_geometry(scenario.signal, cfg["proposal"],
                                          scenario.quad)
    elif scenario.method == "Z2":
        if "family" not in cfg:
            raise ConfigError("Z2 scenarios need method_config['family']")
    elif scenario.method == "Z3":
        for key in ("family", "lambda", "bump"):
            if key not in cfg:
                raise ConfigError(f"Z3 scenarios need method_config[{key!r}]")
    elif scenario.method == "LRT":
        if "proposal" not in cfg:
            raise ConfigError("LRT scenarios need method_config['proposal']")
        cfg["proposal"].pdf_grid()
    if scenario.m is not None:
        scenario.background.pdf_grid()
    scenario.signal.pdf_grid()
    return prep


def _run_one(scenario: McScenario, prep: dict, index: int):
    """One replicate: (ok, reject, estimate, statistic, plugin_variance)."""
    rng = replicate_stream(scenario.seed, index)
    cfg = scenario.method_config
    try:
        x = prep["truth"].sample(scenario.n, rng)
        if scenario.method in ("Z1", "Z2"):
            y = scenario.background.sample(scenario.m, rng)
        if scenario.method == "Z1":
            est = estimate_two_sample(prep["geometry"], x, y)
            rep = test_z1(est, scenario.level)
        elif scenario.method == "Z2":
            family = cfg["family"]
            mle = fit_mle(family, y)
            geometry = score_geometry(scenario.signal, family.model(mle.beta_hat),
                                      scenario.quad)
            est = estimate_two_sample(geometry, x, y)
            pieces = delta_method_pieces(family, mle.beta_hat, geometry, x, y,
                                         scenario.quad)
            rep = test_z2(pieces, est, scenario.level, at_boundary=mle.at_boundary)
        elif scenario.method == "Z3":
            est0 = estimate_theta0(cfg["family"], cfg["lambda"], cfg["bump"],
                                   x, scenario.signal, quad=scenario.quad)
            rep = test_z3(est0, scenario.level)
        else:  # LRT
            fit = fit_lrt(scenario.signal, cfg["proposal"], x)
            p_value = 1.0 - chi2bar01_cdf(fit.lrt_stat)
            return (True, float(p_value < scenario.level), fit.eta_tilde_hat_c,
                    fit.lrt_stat, math.nan)
        return (True, float(rep.p_value < scenario.level), rep.estimate,
                rep.statistic, rep.std_error ** 2)
    except SigcompError:
        return (False, math.nan, math.nan, math.nan, math.nan)


# fork-shared campaign state; set in the parent right before the pool starts
_SHARED: tuple | None = None


def _chunk_worker(bounds):
    lo, hi = bounds
    scenario, prep = _SHARED
    return [_run_one(scenario, prep, i) for i in range(lo, hi)]


def run_campaign(scenario: McScenario, workers: int = 1) -> McSummary:
    """Run every replicate of a scenario and aggregate.

    The result is a pure function of (scenario, seed): worker count only
    affects wall time.
    """
    global _SHARED
    prep = _prepare(scenario)
    total = scenario.replicates
    use_fork = (workers > 1 and total >= 4
                and "fork" in multiprocessing.get_all_start_methods())
    if use_fork:
        workers = min(workers, total)
        step = max(1, math.ceil(total / (workers * 4)))
        bounds = [(lo, min(lo + step, total)) for lo in range(0, total, step)]
        _SHARED = (scenario, prep)
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=workers) as pool:
                parts = pool.map(_chunk_worker, bounds)
        finally:
            _SHARED = None
        rows = [row for part in parts for row in part]
    else:
        rows = [_run_one(scenario, prep, i) for i in range(total)]
    ok = np.array([r[0] for r in rows], dtype=bool)
    rejects = np.array([r[1] for r in rows])
    estimates = np.array([r[2] for r in rows])
    statistics = np.array([r[3] for r in rows])
    plugin_vars = np.array([r[4] for r in rows])
    failures = int((~ok).sum())
    successes = total - failures
    if failures > total / 2:
        raise CampaignDegenerate(
            f"{failures} of {total} replicates failed in campaign {scenario.name!r}")
    rate = float(rejects[ok].mean())
    mc_se = math.sqrt(rate * (1.0 - rate) / successes)
    stats_ok = statistics[ok]
    est_ok = estimates[ok]
    quantiles = {p: float(np.quantile(stats_ok, p)) for p in QUANTILE_PROBS}
    plug = plugin_vars[ok]
    plug_mean = float(np.nanmean(plug)) if np.any(np.isfinite(plug)) else math.nan
    return McSummary(
        name=scenario.name,
        replicates=total,
        successes=successes,
        failures=failures,
        rejection_rate=rate,
        mc_se=mc_se,
        mean_estimate=float(est_ok.mean()),
        var_estimate=float(est_ok.var(ddof=1)) if successes > 1 else 0.0,
        mean_plugin_variance=plug_mean,
        statistic_quantiles=quantiles,
        statistics=stats_ok,
        estimates=est_ok,
    )


def run_grid(scenarios, workers: int = 1) -> list[McSummary]:
    """Elementwise :func:`run_campaign`, one summary row per scenario."""
    return [run_campaign(scenario, workers) for scenario in scenarios]


def default_workers() -> int:
    return max(1, min(os.cpu_count() or 1, 8))
