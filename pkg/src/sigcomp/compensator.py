"""Score geometry, the compensator, and the fixed-proposal two-sample test.

Given a known signal density f_s and a postulated background g on a common
region, the score direction is S = f_s/g - 1 with norm ||S|| under G.  Its
normalized version S+ = S/||S|| is the direction along which background
misspecification mimics a signal; the compensator delta = E_b[S+] is the one
number that corrects inference on the signal fraction for the gap between g
and the true background.  With a physics sample (from the mixture F) and a
background-only sample (from F_b), the signal fraction is estimated by

    eta_hat = (theta_hat - delta_hat) / (||S|| - delta_hat),

where theta_hat and delta_hat are the sample means of S+ over the two
samples, and tested with the asymptotically normal statistic Z1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .density import DEFAULT_QUAD, DensityModel, QuadratureSpec, grid_dot, integral
from .errors import (
    DegenerateDenominator,
    DegenerateSignal,
    EmptySample,
    ObservationOutsideRegion,
    SupportMismatch,
    ZeroVariance,
)

__all__ = [
    "ScoreGeometry",
    "TwoSampleEstimate",
    "InferenceReport",
    "score_geometry",
    "compensator_delta",
    "estimate_two_sample",
    "test_z1",
    "normal_upper_p",
    "clip_fraction",
]

#: Score norms below this mean f_s is numerically indistinguishable from g.
DEGENERATE_NORM = 1e-8

#: |s_norm - delta_hat| below this makes eta_hat meaningless.
DEGENERATE_DENOM = 1e-12


def normal_upper_p(statistic: float) -> float:
    """One-sided upper p-value 1 - Phi(statistic)."""
    return float(ndtr(-statistic))


def clip_fraction(eta: float) -> float:
    """Clip an estimate into [0, 1) for display; inference uses raw values."""
    return float(min(max(eta, 0.0), np.nextafter(1.0, 0.0)))


@dataclass(frozen=True)
class ScoreGeometry:
    """The triple (S, ||S||, S+) for a (signal, proposal) pair.

    Immutable and shareable.  ``scaled_score`` is S0 = S/||S||^2, the version
    whose sample mean estimates theta/||S|| directly.
    """

    signal: DensityModel
    proposal: DensityModel
    s_norm: float
    quad: QuadratureSpec = DEFAULT_QUAD

    def score(self, x):
        return self.signal.pdf(x) / self.proposal.pdf(x) - 1.0

    def unit_score(self, x):
        return self.score(x) / self.s_norm

    def scaled_score(self, x):
        return self.score(x) / self.s_norm ** 2

    @property
    def region(self):
        return self.proposal.region

    @property
    def features(self):
        return tuple(self.signal.features) + tuple(self.proposal.features)


def score_geometry(signal: DensityModel, proposal: DensityModel,
                   quad: QuadratureSpec = DEFAULT_QUAD) -> ScoreGeometry:
    """Compute ||S||^2 = E_G[(f_s/g - 1)^2] and package the score functions."""
    if signal.region != proposal.region:
        raise SupportMismatch(
            f"signal on [{signal.region.lo}, {signal.region.hi}] vs proposal on "
            f"[{proposal.region.lo}, {proposal.region.hi}]")
    if proposal.pdf_grid().min() <= 0.0:
        raise SupportMismatch("proposal density vanishes inside the region")
    # expand (f_s/g - 1)^2 g = f_s^2/g - 2 f_s + g; the last two integrate to -1
    if quad.rule == "fixed_composite":
        fs = signal.pdf_grid()
        second_moment = grid_dot(fs * fs / proposal.pdf_grid(), signal.region)
    else:
        feats = tuple(signal.features) + tuple(proposal.features)
        second_moment = integral(lambda x: signal.pdf(x) ** 2 / proposal.pdf(x),
                                 signal.region, quad, features=feats)
    ns2 = second_moment - 1.0
    if ns2 < DEGENERATE_NORM ** 2:
        raise DegenerateSignal(
            f"score norm {math.sqrt(max(ns2, 0.0)):.3e} below {DEGENERATE_NORM}; "
            "signal and proposal densities coincide")
    return ScoreGeometry(signal=signal, proposal=proposal,
                         s_norm=math.sqrt(ns2), quad=quad)


def compensator_delta(geometry: ScoreGeometry, background: DensityModel,
                      quad: QuadratureSpec | None = None) -> float:
    """Population compensator delta = E_b[S+] by quadrature.

    This is the quadrature-side object used by simulations and diagnostics;
    the data-driven counterpart is the background-sample mean in
    :func:`estimate_two_sample`.  They are never mixed in one report.
    """
    quad = quad or geometry.quad
    if background.region != geometry.region:
        raise SupportMismatch("background lives on a different region")
    if quad.rule == "fixed_composite":
        cross = grid_dot(geometry.signal.pdf_grid() * background.pdf_grid()
                         / geometry.proposal.pdf_grid(), geometry.region)
    else:
        feats = geometry.features + tuple(background.features)
        cross = integral(
            lambda x: geometry.signal.pdf(x) * background.pdf(x) / geometry.proposal.pdf(x),
            geometry.region, quad, features=feats)
    return (cross - 1.0) / geometry.s_norm


@dataclass(frozen=True)
class TwoSampleEstimate:
    """Empirical score moments of the two samples and the resulting eta_hat.

    ``eta_hat`` is reported unclipped; the central limit theorem concerns the
    raw estimator and clipping would break the variance calibration.
    """

    theta_hat: float
    delta_hat: float
    eta_hat: float
    sigma2_theta: float
    sigma2_delta: float
    sigma2_eta: float
    pi_hat: float
    n: int
    m: int
    s_norm: float
    denominator_flipped: bool = False


def _validate_sample(values, region, label: str, minimum: int = 2) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size < minimum:
        raise EmptySample(f"{label} sample needs at least {minimum} observations, "
                          f"got {arr.size}")
    outside = ~region.contains(arr)
    if outside.any():
        raise ObservationOutsideRegion(
            f"{int(outside.sum())} {label} observations outside "
            f"[{region.lo}, {region.hi}]")
    return arr


def estimate_two_sample(geometry: ScoreGeometry, physics,
                        background_only) -> TwoSampleEstimate:
    """Plug-in estimates of theta, delta, eta and their variances."""
    x = _validate_sample(physics, geometry.region, "physics")
    y = _validate_sample(background_only, geometry.region, "background-only")
    n, m = x.size, y.size
    sx = geometry.unit_score(x)
    sy = geometry.unit_score(y)
    theta = float(sx.mean())
    delta = float(sy.mean())
    sigma2_theta = float((sx ** 2).mean() - theta ** 2)
    sigma2_delta = float((sy ** 2).mean() - delta ** 2)
    s = geometry.s_norm
    denom = s - delta
    if abs(denom) < DEGENERATE_DENOM:
        raise DegenerateDenominator(
            f"|s_norm - delta_hat| = {abs(denom):.3e} is numerically zero")
    eta = (theta - delta) / denom
    pi_hat = n / (m + n)
    sigma2_eta = ((1.0 - pi_hat) * sigma2_theta / denom ** 2
                  + pi_hat * sigma2_delta * (theta - s) ** 2 / denom ** 4)
    return TwoSampleEstimate(
        theta_hat=theta, delta_hat=delta, eta_hat=eta,
        sigma2_theta=sigma2_theta, sigma2_delta=sigma2_delta,
        sigma2_eta=sigma2_eta, pi_hat=pi_hat, n=n, m=m, s_norm=s,
        denominator_flipped=bool(denom < 0))


@dataclass(frozen=True)
class InferenceReport:
    """One analysis outcome: estimate, test, p-value, confidence interval."""

    estimate: float
    std_error: float
    statistic: float
    p_value: float
    ci_lo: float
    ci_hi: float
    level: float
    method_tag: str
    diagnostics: dict = field(default_factory=dict)


def _gaussian_report(estimate: float, sigma: float, scale: float, level: float,
                     method_tag: str, diagnostics: dict) -> InferenceReport:
    """Shared Z-style report: statistic = scale*estimate/sigma, two-sided CI."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if sigma <= 0.0 or not math.isfinite(sigma):
        raise ZeroVariance(f"plug-in standard deviation {sigma} is not positive")
    statistic = scale * estimate / sigma
    se = sigma / scale
    z = float(ndtri(1.0 - level / 2.0))
    return InferenceReport(
        estimate=estimate, std_error=se, statistic=statistic,
        p_value=normal_upper_p(statistic),
        ci_lo=estimate - z * se, ci_hi=estimate + z * se,
        level=level, method_tag=method_tag, diagnostics=diagnostics)


def test_z1(estimate: TwoSampleEstimate, level: float = 0.05) -> InferenceReport:
    """Fixed-proposal one-sided test of a zero signal fraction."""
    scale = math.sqrt(estimate.m * estimate.n / (estimate.m + estimate.n))
    diagnostics = {
        "eta_clipped": clip_fraction(estimate.eta_hat),
        "theta_hat": estimate.theta_hat,
        "delta_hat": estimate.delta_hat,
        "s_norm": estimate.s_norm,
        "denominator_flipped": estimate.denominator_flipped,
    }
    return _gaussian_report(estimate.eta_hat, math.sqrt(max(estimate.sigma2_eta, 0.0)),
                            scale, level, "Z1", diagnostics)
