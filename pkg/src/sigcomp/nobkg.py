"""Conservative inference when no background-only sample exists.

Without labeled background data the compensator is not estimable, but the
scaled mean score theta0 = theta/||S|| is, and it bounds the signal fraction
from below whenever the compensator is nonpositive.  Nonpositivity is
engineered by proposing a background that dominates the true one over the
signal region: a baseline family q_alpha (alpha fitted on the physics data)
plus a diffuse two-Gaussian bump whose weight lambda the analyst picks from a
sensitivity scan.  The Z3 statistic tests theta0 = 0 with a plug-in variance
that propagates the uncertainty of alpha_hat; lambda stays frozen throughout.

Choosing lambda is deliberately left to the analyst: the scan only tabulates
the proposal curves and the per-lambda reports, because certifying dominance
numerically would require the unknown background itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .compensator import InferenceReport, _gaussian_report, _validate_sample, score_geometry
from .density import (
    DEFAULT_QUAD,
    DensityModel,
    QuadratureSpec,
    make_bump_mixture,
)
from .errors import LambdaOutOfRange, RegionExceedsSupport, ZeroVariance
from .optim import golden_section_max
from .parametric import (
    MleResult,
    ParametricProposal,
    _checked_inverse,
    _observed_information,
    _score_matrix,
    fit_mle,
)

__all__ = [
    "SignalRegion",
    "Theta0Estimate",
    "SensitivityGrid",
    "signal_region",
    "estimate_theta0",
    "test_z3",
    "sensitivity_scan",
    "theoretical_type1",
]


@dataclass(frozen=True)
class SignalRegion:
    """Symmetric interval around the signal mode holding mass 1 - epsilon."""

    mu_s: float
    d_eps: float
    epsilon: float

    @property
    def lo(self) -> float:
        return self.mu_s - self.d_eps

    @property
    def hi(self) -> float:
        return self.mu_s + self.d_eps


def _find_mode(signal: DensityModel) -> float:
    grid = np.linspace(signal.region.lo, signal.region.hi, 10_001)
    vals = signal.pdf(grid)
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    if lo >= hi:
        return float(grid[k])
    return golden_section_max(lambda x: float(signal.pdf(x)), lo, hi,
                              tol=1e-12 * signal.region.width)


def signal_region(signal: DensityModel, epsilon: float,
                  mode: float | None = None) -> SignalRegion:
    """Shortest symmetric interval around the mode with signal mass 1 - epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    mu = float(mode) if mode is not None else _find_mode(signal)
    region = signal.region
    d_max = min(region.hi - mu, mu - region.lo)
    if d_max <= 0:
        raise RegionExceedsSupport("signal mode sits on the region boundary")
    target = 1.0 - epsilon

    def mass(d):
        return signal.cdf(mu + d) - signal.cdf(mu - d)

    if mass(d_max) < target - 1e-12:
        raise RegionExceedsSupport(
            f"symmetric interval with mass {target} does not fit inside "
            f"[{region.lo}, {region.hi}]")
    lo_d, hi_d = 0.0, d_max
    for _ in range(200):
        mid = 0.5 * (lo_d + hi_d)
        if mass(mid) < target:
            lo_d = mid
        else:
            hi_d = mid
        if hi_d - lo_d <= 1e-13 * max(1.0, d_max):
            break
    return SignalRegion(mu_s=mu, d_eps=hi_d, epsilon=epsilon)


@dataclass(frozen=True)
class Theta0Estimate:
    """Scaled mean score on the physics sample and its plug-in variance."""

    theta0_hat: float
    sigma2_theta0: float
    alpha_hat: np.ndarray
    lambda_star: float
    n: int
    s_norm: float
    theta_hat: float
    sigma2_theta: float
    at_boundary: bool


def estimate_theta0(q_family: ParametricProposal, lambda_star: float,
                    bump_params, physics, signal: DensityModel,
                    quad: QuadratureSpec = DEFAULT_QUAD,
                    alpha_fit: MleResult | None = None) -> Theta0Estimate:
    """Fit alpha on the physics data, add the bump, and estimate theta0.

    ``bump_params`` is (mu1, mu2, sigma0).  The plug-in variance propagates
    only the alpha uncertainty (lambda is frozen by construction); all its
    sample averages run over the physics sample.
    """
    if not 0.0 <= lambda_star < 0.5:
        raise LambdaOutOfRange(f"lambda must lie in [0, 1/2), got {lambda_star}")
    mu1, mu2, sigma0 = (float(v) for v in bump_params)
    x = _validate_sample(physics, q_family.region, "physics")
    n = x.size
    fit = alpha_fit if alpha_fit is not None else fit_mle(q_family, x)
    alpha = fit.beta_hat

    def proposal_at(a):
        return make_bump_mixture(q_family.model(a), lambda_star, mu1, mu2, sigma0)

    geometry = score_geometry(signal, proposal_at(alpha), quad)
    s = geometry.s_norm
    s0_x = geometry.scaled_score(x)
    theta0 = float(s0_x.mean())
    theta = theta0 * s
    sigma2_theta = float(((s0_x * s) ** 2).mean() - theta ** 2)
    base = sigma2_theta / s ** 2
    if q_family.is_frozen:
        return Theta0Estimate(theta0_hat=theta0, sigma2_theta0=base,
                              alpha_hat=alpha.copy(), lambda_star=lambda_star,
                              n=n, s_norm=s, theta_hat=theta,
                              sigma2_theta=sigma2_theta,
                              at_boundary=fit.at_boundary)
    p = q_family.p
    steps = q_family.fd_steps(alpha)
    d_hat = np.empty(p)
    for j in range(p):
        h = steps[j]
        up = alpha.copy(); up[j] += h
        dn = alpha.copy(); dn[j] -= h
        geo_up = score_geometry(signal, proposal_at(up), quad)
        geo_dn = score_geometry(signal, proposal_at(dn), quad)
        d_hat[j] = float(((geo_up.scaled_score(x) - geo_dn.scaled_score(x))
                          / (2.0 * h)).mean())
    scores = _score_matrix(q_family, alpha, x)
    j_hat = _observed_information(q_family, alpha, x)
    v_hat = scores @ scores.T / n
    c_hat = (s0_x * scores).mean(axis=1)
    j_inv = _checked_inverse(j_hat, "baseline observed information")
    jd = j_inv @ d_hat
    sigma2 = base + float(jd @ v_hat @ jd) + 2.0 * float(jd @ c_hat)
    return Theta0Estimate(theta0_hat=theta0, sigma2_theta0=sigma2,
                          alpha_hat=alpha.copy(), lambda_star=lambda_star,
                          n=n, s_norm=s, theta_hat=theta,
                          sigma2_theta=sigma2_theta,
                          at_boundary=fit.at_boundary)


def test_z3(estimate: Theta0Estimate, level: float = 0.05) -> InferenceReport:
    """Background-free one-sided test of a zero scaled mean score."""
    if estimate.sigma2_theta0 <= 0.0:
        raise ZeroVariance(
            f"plug-in variance {estimate.sigma2_theta0} is not positive")
    diagnostics = {
        "theta0_clipped": float(min(max(estimate.theta0_hat, 0.0), 1.0)),
        "alpha_hat": [float(a) for a in np.atleast_1d(estimate.alpha_hat)],
        "lambda": estimate.lambda_star,
        "s_norm": estimate.s_norm,
        "at_boundary": estimate.at_boundary,
    }
    return _gaussian_report(estimate.theta0_hat,
                            math.sqrt(estimate.sigma2_theta0),
                            math.sqrt(estimate.n), level, "Z3", diagnostics)


@dataclass(frozen=True)
class SensitivityGrid:
    """Per-lambda proposal curves and reports for the analyst's dominance check."""

    lambdas: tuple
    x_grid: np.ndarray
    curves: np.ndarray  # shape (len(lambdas), len(x_grid))
    estimates: tuple
    reports: tuple
    alpha_hat: np.ndarray


def sensitivity_scan(q_family: ParametricProposal, bump_params, lambdas,
                     physics, x_grid, signal: DensityModel,
                     quad: QuadratureSpec = DEFAULT_QUAD,
                     level: float = 0.05) -> SensitivityGrid:
    """Tabulate the bumped proposal and the Z3 report across a lambda grid.

    alpha is fitted once on the physics sample and reused for every lambda.
    """
    lams = [float(v) for v in lambdas]
    if not lams:
        raise ValueError("lambda grid must be nonempty")
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambda grid must be strictly increasing")
    if not all(0.0 <= v < 0.5 for v in lams):
        raise LambdaOutOfRange("every lambda must lie in [0, 1/2)")
    x_grid = np.asarray(x_grid, dtype=float)
    x = _validate_sample(physics, q_family.region, "physics")
    fit = fit_mle(q_family, x)
    mu1, mu2, sigma0 = (float(v) for v in bump_params)
    curves = np.empty((len(lams), x_grid.size))
    estimates = []
    reports = []
    for i, lam in enumerate(lams):
        proposal = make_bump_mixture(q_family.model(fit.beta_hat), lam,
                                     mu1, mu2, sigma0)
        curves[i] = proposal.pdf(x_grid)
        est = estimate_theta0(q_family, lam, bump_params, x, signal,
                              quad=quad, alpha_fit=fit)
        estimates.append(est)
        reports.append(test_z3(est, level))
    return SensitivityGrid(lambdas=tuple(lams), x_grid=x_grid, curves=curves,
                           estimates=tuple(estimates), reports=tuple(reports),
                           alpha_hat=fit.beta_hat.copy())


def theoretical_type1(delta_beta_star: float, sigma_theta: float, n: int,
                      level: float = 0.05) -> float:
    """Asymptotic rejection rate of the conservative test under the null.

    Equals the nominal level when the compensator vanishes, grows with n for
    a positive compensator, and decays to zero for a negative one.
    """
    if sigma_theta <= 0.0:
        raise ValueError("sigma_theta must be positive")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    z = float(ndtri(1.0 - level))
    shift = delta_beta_star * math.sqrt(n) / sigma_theta
    return float(ndtr(-(z - shift)))
