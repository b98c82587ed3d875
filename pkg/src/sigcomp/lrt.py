"""Likelihood-ratio testing against a plugged-in background estimate.

This module implements the comparison baseline: treat a background estimate
g_tilde as if it were the truth, fit the signal fraction of the two-component
mixture by maximum likelihood on the physics sample, and refer the likelihood
ratio statistic to chibar2(0,1) (half point mass at zero, half chi-square with
one degree of freedom), the usual reference when the tested parameter sits on
the boundary of its space.

The log-likelihood is strictly concave in the mixing fraction, so the
unconstrained maximizer over (-1, 1) is unique and the constrained maximizer
over [0, 1) is its positive part.  Whether the reference distribution holds
is governed by the sign of the compensator of (g_tilde, f_b): a positive
compensator makes the statistic stochastically larger than chibar2(0,1) and
the nominal test anti-conservative.  :func:`spurious_proposal` builds the
canonical failure case, a baseline contaminated by a fraction epsilon of the
signal itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .compensator import _validate_sample, compensator_delta, score_geometry
from .density import DEFAULT_QUAD, DensityModel, QuadratureSpec, mixture
from .errors import DomainError, FlatLikelihood
from .optim import golden_section_max

__all__ = [
    "LrtFit",
    "fit_lrt",
    "chi2bar01_cdf",
    "chi2bar01_quantile",
    "delta_tilde",
    "spurious_proposal",
]

_EDGE = 1e-9


@dataclass(frozen=True)
class LrtFit:
    """Maximum-likelihood fit of the plugged-in mixture on one sample.

    ``eta_tilde_hat`` maximizes over the extended space (-1, 1);
    ``eta_tilde_hat_c`` is its positive part, the maximizer over [0, 1).
    ``lrt_stat`` = -2 [loglik(0) - loglik(eta_tilde_hat_c)] >= 0 and is
    exactly zero whenever the unconstrained maximizer is nonpositive.
    """

    eta_tilde_hat: float
    eta_tilde_hat_c: float
    loglik_at_0: float
    loglik_at_c: float
    lrt_stat: float
    boundary_flag: bool


def fit_lrt(signal: DensityModel, g_tilde: DensityModel, physics) -> LrtFit:
    """Fit the signal fraction of eta*f_s + (1-eta)*g_tilde by MLE."""
    x = _validate_sample(physics, g_tilde.region, "physics", minimum=1)
    s = signal.pdf(x) / g_tilde.pdf(x) - 1.0
    if not np.all(np.isfinite(s)):
        raise FlatLikelihood("density ratio is not finite at some observations")
    if np.max(np.abs(s)) < 1e-12:
        raise FlatLikelihood(
            "signal equals the proposal at every observation; the likelihood "
            "does not depend on the mixing fraction")
    smax = float(s.max())
    lo = -1.0 + _EDGE
    if smax > 0.0:
        # keep 1 + eta*s positive at every observation
        lo = max(lo, -(1.0 - _EDGE) / smax)
    hi = 1.0 - _EDGE

    def centered(eta):
        return float(np.log1p(eta * s).sum())

    span = hi - lo
    eta = golden_section_max(centered, lo, hi, tol=1e-13 * max(1.0, span))
    eta = _newton_refine(eta, s, lo, hi)
    boundary = (eta - lo) <= 1e-8 * span or (hi - eta) <= 1e-8 * span
    eta_c = eta if eta > 0.0 else 0.0
    loglik0 = float(g_tilde.logpdf(x).sum())
    gain = centered(eta_c)
    return LrtFit(
        eta_tilde_hat=eta, eta_tilde_hat_c=eta_c,
        loglik_at_0=loglik0, loglik_at_c=loglik0 + gain,
        lrt_stat=max(2.0 * gain, 0.0), boundary_flag=bool(boundary))


def _newton_refine(eta: float, s: np.ndarray, lo: float, hi: float) -> float:
    best = eta
    ll = float(np.log1p(best * s).sum())
    for _ in range(8):
        r = s / (1.0 + best * s)
        d1 = float(r.sum())
        d2 = -float((r * r).sum())
        if d2 >= 0.0:
            break
        cand = min(max(best - d1 / d2, lo), hi)
        cll = float(np.log1p(cand * s).sum())
        if not math.isfinite(cll) or cll < ll:
            break
        moved = abs(cand - best)
        best, ll = cand, cll
        if moved < 1e-15:
            break
    return best


def chi2bar01_cdf(t: float) -> float:
    """CDF of the half-zero half-chi2(1) mixture."""
    if t < 0.0 or math.isnan(t):
        raise DomainError(f"chibar2 statistic must be >= 0, got {t}")
    return 0.5 + 0.5 * float(chi2.cdf(t, df=1))


def chi2bar01_quantile(p: float) -> float:
    """Right-inverse of :func:`chi2bar01_cdf`; zero at or below the atom."""
    if not 0.0 < p < 1.0 or math.isnan(p):
        raise DomainError(f"quantile probability must lie in (0, 1), got {p}")
    if p <= 0.5:
        return 0.0
    return float(chi2.ppf(2.0 * p - 1.0, df=1))


def delta_tilde(signal: DensityModel, g_tilde: DensityModel,
                background: DensityModel,
                quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Compensator of the plugged-in proposal against the true background.

    Its sign decides whether the chibar2(0,1) reference is conservative
    (negative) or anti-conservative (positive) for :func:`fit_lrt`.
    """
    return compensator_delta(score_geometry(signal, g_tilde, quad), background, quad)


def spurious_proposal(baseline: DensityModel, signal: DensityModel,
                      epsilon: float) -> DensityModel:
    """Baseline background contaminated by a signal-shaped fraction epsilon."""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    return mixture([epsilon, 1.0 - epsilon], [signal, baseline])
