"""Parametric proposal families: MLE, delta-method variance, and the Z2 test.

When the proposal background g_beta carries an unknown parameter beta fitted
by maximum likelihood on the background-only sample, the uncertainty of
beta_hat propagates into the estimated signal fraction.  The plug-in variance
assembled here (A, B, Gamma, J, V, C pieces) accounts for that propagation;
with it the studentized statistic Z2 is asymptotically standard normal under
the null exactly like the fixed-proposal Z1.

Derivatives of the scaled score S0 with respect to beta are always taken
numerically through the full geometry (the normalizing constant and the score
norm both depend on beta, which is easy to get wrong analytically).  Log
density derivatives follow ``grad_mode``: closed forms where the family
provides them, central differences otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import optimize as sp_optimize

from .compensator import (
    InferenceReport,
    ScoreGeometry,
    TwoSampleEstimate,
    _gaussian_report,
    _validate_sample,
    clip_fraction,
    score_geometry,
)
from .density import (
    DensityModel,
    QuadratureSpec,
    SearchRegion,
    exponential_logscale,
    gaussian_tail,
    pareto1,
    power_law_shifted,
    truncated_gamma,
    truncated_gaussian,
)
from .errors import (
    FdStepInvalid,
    NonFiniteLogLik,
    OptimizationFailure,
    SingularInformation,
    ZeroVariance,
)
from .optim import golden_section_max

__all__ = [
    "ParametricProposal",
    "MleResult",
    "DeltaMethodPieces",
    "fit_mle",
    "delta_method_pieces",
    "test_z2",
    "standard_family",
]

#: Default relative step for central differences (cube root of machine eps).
FD_STEP_SCALE = float(np.finfo(float).eps) ** (1.0 / 3.0)

#: Reciprocal condition number below which the information matrix is singular.
SINGULAR_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class ParametricProposal:
    """Density family over a compact parameter box.

    ``builder(beta)`` returns the DensityModel at parameter ``beta``; it must
    be well defined in an open neighborhood of the box so central differences
    can straddle interior points.  A zero-width box declares a frozen
    (singleton) family: no parameter uncertainty is propagated.
    """

    builder: object
    param_box: np.ndarray
    init: np.ndarray
    grad_mode: str = "central_fd"
    fd_step: float | None = None
    grad_log: object = None
    hess_log: object = None
    name: str = "custom"

    def __post_init__(self):
        box = np.atleast_2d(np.asarray(self.param_box, dtype=float))
        init = np.atleast_1d(np.asarray(self.init, dtype=float))
        if box.shape != (init.size, 2):
            raise ValueError(f"param_box shape {box.shape} does not match "
                             f"init of length {init.size}")
        if not np.all(np.isfinite(box)) or np.any(box[:, 0] > box[:, 1]):
            raise ValueError("param_box needs finite lo <= hi per coordinate")
        if np.any(init < box[:, 0]) or np.any(init > box[:, 1]):
            raise ValueError("init must lie inside param_box")
        if self.grad_mode not in ("analytic", "central_fd"):
            raise ValueError(f"unknown grad_mode {self.grad_mode!r}")
        if self.grad_mode == "analytic" and (self.grad_log is None or self.hess_log is None):
            raise ValueError("analytic grad_mode requires grad_log and hess_log")
        if self.fd_step is not None and not (math.isfinite(self.fd_step) and self.fd_step > 0):
            raise FdStepInvalid(f"fd_step must be positive and finite, got {self.fd_step}")
        object.__setattr__(self, "param_box", box)
        object.__setattr__(self, "init", init)

    @property
    def p(self) -> int:
        return self.init.size

    @property
    def is_frozen(self) -> bool:
        return bool(np.all(self.param_box[:, 1] - self.param_box[:, 0] <= 0.0))

    def fd_steps(self, beta) -> np.ndarray:
        if self.fd_step is not None:
            return np.full(self.p, self.fd_step)
        return FD_STEP_SCALE * np.maximum(1.0, np.abs(np.asarray(beta, dtype=float)))

    def model(self, beta) -> DensityModel:
        return self.builder(np.atleast_1d(np.asarray(beta, dtype=float)))

    @property
    def region(self) -> SearchRegion:
        return self.model(self.init).region


@dataclass(frozen=True)
class MleResult:
    beta_hat: np.ndarray
    loglik: float
    converged: bool
    at_boundary: bool
    observed_info: np.ndarray


def _loglik(family: ParametricProposal, beta, sample: np.ndarray) -> float:
    val = float(family.model(beta).logpdf(sample).sum())
    if math.isnan(val):
        raise NonFiniteLogLik(f"log-likelihood is NaN at beta={np.asarray(beta)}")
    return val


def fit_mle(family: ParametricProposal, sample) -> MleResult:
    """Maximize the log-likelihood of the family over its parameter box."""
    sample = _validate_sample(sample, family.region, "fit", minimum=1)
    box = family.param_box
    if family.is_frozen:
        beta = family.init.copy()
        return MleResult(beta_hat=beta, loglik=_loglik(family, beta, sample),
                         converged=True, at_boundary=False,
                         observed_info=np.zeros((family.p, family.p)))
    if family.p == 1:
        lo, hi = box[0]
        # Newton polish recovers full precision for analytic families, so the
        # golden stage only needs to land in the right basin
        tol = (1e-5 if family.grad_mode == "analytic" else 1e-9) * max(1.0, hi - lo)
        beta = np.array([golden_section_max(
            lambda b: _loglik(family, [b], sample), lo, hi, tol)])
        converged = True
    else:
        def negobj(b):
            return -_loglik(family, np.clip(b, box[:, 0], box[:, 1]), sample)

        res = sp_optimize.minimize(negobj, family.init, method="Nelder-Mead",
                                   options={"xatol": 1e-8, "fatol": 1e-10,
                                            "maxiter": 4000})
        beta = np.clip(res.x, box[:, 0], box[:, 1])
        converged = bool(res.success)
    if family.grad_mode == "analytic":
        beta = _newton_polish(family, beta, sample)
    final = _loglik(family, beta, sample)
    if not math.isfinite(final) or final < _loglik(family, family.init, sample) - 1e-8:
        raise OptimizationFailure(
            f"maximization of {family.name!r} ended below its starting value")
    steps = family.fd_steps(beta)
    at_boundary = bool(np.any(beta - box[:, 0] <= steps) or np.any(box[:, 1] - beta <= steps))
    return MleResult(beta_hat=beta, loglik=final, converged=converged,
                     at_boundary=at_boundary,
                     observed_info=_observed_information(family, beta, sample))


def _newton_polish(family: ParametricProposal, beta: np.ndarray,
                   sample: np.ndarray) -> np.ndarray:
    box = family.param_box
    best = beta.copy()
    best_ll = _loglik(family, best, sample)
    for _ in range(12):
        grad = family.grad_log(best, sample).sum(axis=1)
        hess = family.hess_log(best, sample).sum(axis=2)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        cand = np.clip(best - step, box[:, 0], box[:, 1])
        ll = _loglik(family, cand, sample)
        if not math.isfinite(ll) or ll < best_ll:
            break
        moved = np.max(np.abs(cand - best))
        best, best_ll = cand, ll
        if moved < 1e-13 * max(1.0, float(np.max(np.abs(best)))):
            break
    return best


def _score_matrix(family: ParametricProposal, beta: np.ndarray,
                  sample: np.ndarray) -> np.ndarray:
    """Per-observation gradient of log g_beta, shape (p, len(sample))."""
    if family.grad_mode == "analytic":
        return np.asarray(family.grad_log(beta, sample), dtype=float)
    steps = family.fd_steps(beta)
    rows = []
    for j in range(family.p):
        h = steps[j]
        up = beta.copy(); up[j] += h
        dn = beta.copy(); dn[j] -= h
        rows.append((family.model(up).logpdf(sample)
                     - family.model(dn).logpdf(sample)) / (2.0 * h))
    return np.vstack(rows)


def _observed_information(family: ParametricProposal, beta: np.ndarray,
                          sample: np.ndarray) -> np.ndarray:
    """J_hat = -(1/m) sum of per-observation log-density Hessians at beta."""
    m = sample.size
    if family.grad_mode == "analytic":
        hess = np.asarray(family.hess_log(beta, sample), dtype=float)
        info = -hess.mean(axis=2)
    else:
        steps = family.fd_steps(beta)
        p = family.p
        info = np.empty((p, p))
        base = _loglik(family, beta, sample)
        for j in range(p):
            hj = steps[j]
            up = beta.copy(); up[j] += hj
            dn = beta.copy(); dn[j] -= hj
            info[j, j] = -(_loglik(family, up, sample) - 2.0 * base
                           + _loglik(family, dn, sample)) / (hj * hj * m)
            for k in range(j + 1, p):
                hk = steps[k]
                pp = beta.copy(); pp[[j, k]] += [hj, hk]
                pm = beta.copy(); pm[[j, k]] += [hj, -hk]
                mp = beta.copy(); mp[[j, k]] += [-hj, hk]
                mm = beta.copy(); mm[[j, k]] += [-hj, -hk]
                val = -(_loglik(family, pp, sample) - _loglik(family, pm, sample)
                        - _loglik(family, mp, sample) + _loglik(family, mm, sample)
                        ) / (4.0 * hj * hk * m)
                info[j, k] = info[k, j] = val
    return 0.5 * (info + info.T)


def _checked_inverse(mat: np.ndarray, what: str) -> np.ndarray:
    svals = np.linalg.svd(mat, compute_uv=False)
    if not np.all(np.isfinite(svals)) or svals.min() <= SINGULAR_RTOL * max(1.0, svals.max()):
        raise SingularInformation(f"{what} is singular to tolerance {SINGULAR_RTOL}")
    return np.linalg.inv(mat)


@dataclass(frozen=True)
class DeltaMethodPieces:
    """Sample-average ingredients of the Z2 plug-in variance."""

    A_hat: float
    B_hat: float
    Gamma_hat: np.ndarray
    J_hat: np.ndarray
    V_hat: np.ndarray
    C_hat: np.ndarray
    sigma2_theta: float
    sigma2_delta: float
    n: int
    m: int


def delta_method_pieces(family: ParametricProposal, beta_hat,
                        geometry_at_beta_hat: ScoreGeometry, physics,
                        background_only,
                        quad: QuadratureSpec | None = None) -> DeltaMethodPieces:
    """Assemble every plug-in quantity entering the Z2 variance at beta_hat."""
    geometry = geometry_at_beta_hat
    quad = quad or geometry.quad
    beta_hat = np.atleast_1d(np.asarray(beta_hat, dtype=float))
    x = _validate_sample(physics, geometry.region, "physics")
    y = _validate_sample(background_only, geometry.region, "background-only")
    n, m = x.size, y.size
    s = geometry.s_norm
    sd_x = geometry.unit_score(x)
    sd_y = geometry.unit_score(y)
    theta = float(sd_x.mean())
    delta = float(sd_y.mean())
    theta0 = theta / s
    delta0 = delta / s
    sigma2_theta = float((sd_x ** 2).mean() - theta ** 2)
    sigma2_delta = float((sd_y ** 2).mean() - delta ** 2)
    denom = s - delta
    a_hat = 1.0 / denom
    b_hat = (theta - s) / denom ** 2
    p = family.p
    if family.is_frozen:
        return DeltaMethodPieces(
            A_hat=a_hat, B_hat=b_hat, Gamma_hat=np.zeros(p), J_hat=np.eye(p),
            V_hat=np.zeros((p, p)), C_hat=np.zeros(p),
            sigma2_theta=sigma2_theta, sigma2_delta=sigma2_delta, n=n, m=m)
    steps = family.fd_steps(beta_hat)
    d_s0_x = np.empty((p, n))
    d_s0_y = np.empty((p, m))
    for j in range(p):
        h = steps[j]
        up = beta_hat.copy(); up[j] += h
        dn = beta_hat.copy(); dn[j] -= h
        geo_up = score_geometry(geometry.signal, family.model(up), quad)
        geo_dn = score_geometry(geometry.signal, family.model(dn), quad)
        d_s0_x[j] = (geo_up.scaled_score(x) - geo_dn.scaled_score(x)) / (2.0 * h)
        d_s0_y[j] = (geo_up.scaled_score(y) - geo_dn.scaled_score(y)) / (2.0 * h)
    gamma = (d_s0_x.mean(axis=1) / (1.0 - delta0)
             + (theta0 - 1.0) / (1.0 - delta0) ** 2 * d_s0_y.mean(axis=1))
    scores = _score_matrix(family, beta_hat, y)
    j_hat = _observed_information(family, beta_hat, y)
    v_hat = scores @ scores.T / m
    c_hat = (sd_y * scores).mean(axis=1)
    if gamma.any() or v_hat.any() or c_hat.any():
        _checked_inverse(j_hat, "observed information")
    return DeltaMethodPieces(
        A_hat=a_hat, B_hat=b_hat, Gamma_hat=gamma, J_hat=j_hat,
        V_hat=0.5 * (v_hat + v_hat.T), C_hat=c_hat,
        sigma2_theta=sigma2_theta, sigma2_delta=sigma2_delta, n=n, m=m)


def assemble_z2_variance(pieces: DeltaMethodPieces) -> float:
    """sigma2 for eta_hat at beta_hat, combining both samples and the MLE noise."""
    n, m = pieces.n, pieces.m
    if pieces.Gamma_hat.any() or pieces.V_hat.any() or pieces.C_hat.any():
        j_inv = _checked_inverse(pieces.J_hat, "observed information")
        jg = j_inv @ pieces.Gamma_hat
        mle_terms = float(jg @ pieces.V_hat @ jg
                          + 2.0 * pieces.B_hat * (jg @ pieces.C_hat))
    else:
        mle_terms = 0.0
    return (m / (m + n) * pieces.A_hat ** 2 * pieces.sigma2_theta
            + n / (m + n) * (pieces.B_hat ** 2 * pieces.sigma2_delta + mle_terms))


def test_z2(pieces: DeltaMethodPieces, estimate: TwoSampleEstimate,
            level: float = 0.05, at_boundary: bool = False) -> InferenceReport:
    """Estimated-proposal one-sided test of a zero signal fraction.

    ``estimate`` must come from :func:`estimate_two_sample` on the geometry at
    beta_hat.  A boundary MLE violates the interiority assumption behind the
    variance expansion; the p-value is still produced but flagged unreliable.
    """
    sigma2 = assemble_z2_variance(pieces)
    if sigma2 <= 0.0:
        raise ZeroVariance(f"assembled Z2 variance {sigma2} is not positive")
    scale = math.sqrt(estimate.m * estimate.n / (estimate.m + estimate.n))
    diagnostics = {
        "eta_clipped": clip_fraction(estimate.eta_hat),
        "theta_hat": estimate.theta_hat,
        "delta_hat": estimate.delta_hat,
        "s_norm": estimate.s_norm,
        "denominator_flipped": estimate.denominator_flipped,
        "at_boundary": bool(at_boundary),
        "variance_unreliable": bool(at_boundary),
    }
    return _gaussian_report(estimate.eta_hat, math.sqrt(sigma2), scale, level,
                            "Z2", diagnostics)


# --- standard families with closed-form log-density derivatives -----------

def _pareto_log_norm_derivs(beta: float, a: float, b: float):
    la, lb = math.log(a), math.log(b)
    ea, eb = a ** -beta, b ** -beta
    u = ea - eb
    up = -la * ea + lb * eb
    upp = la * la * ea - lb * lb * eb
    c = u / beta
    cp = up / beta - u / beta ** 2
    cpp = upp / beta - 2.0 * up / beta ** 2 + 2.0 * u / beta ** 3
    d1 = cp / c
    return d1, cpp / c - d1 * d1


def _expon_log_norm_derivs(beta: float, a: float, b: float):
    ea, eb = math.exp(-beta * a), math.exp(-beta * b)
    u = ea - eb
    up = -a * ea + b * eb
    upp = a * a * ea - b * b * eb
    c = u / beta
    cp = up / beta - u / beta ** 2
    cpp = upp / beta - 2.0 * up / beta ** 2 + 2.0 * u / beta ** 3
    d1 = cp / c
    return d1, cpp / c - d1 * d1


def _pareto_grad(beta, x, a, b, shift):
    d1, _ = _pareto_log_norm_derivs(float(beta[0]), a, b)
    return (-np.log(np.asarray(x, float) + shift) - d1)[None, :]


def _pareto_hess(beta, x, a, b, shift):
    _, d2 = _pareto_log_norm_derivs(float(beta[0]), a, b)
    return np.full((1, 1, np.asarray(x).size), -d2)


def _expon_grad(beta, x, a, b):
    d1, _ = _expon_log_norm_derivs(float(beta[0]), a, b)
    return (-np.asarray(x, float) - d1)[None, :]


def _expon_hess(beta, x, a, b):
    _, d2 = _expon_log_norm_derivs(float(beta[0]), a, b)
    return np.full((1, 1, np.asarray(x).size), -d2)


def _build_pareto1(beta, region):
    return pareto1(region, float(beta[0]))


def _build_power_law_shifted(beta, region):
    return power_law_shifted(region, float(beta[0]))


def _build_exponential(beta, region):
    return exponential_logscale(region, float(beta[0]))


def _build_gaussian_tail(beta, region):
    return gaussian_tail(region, float(beta[0]))


def _build_truncated_gamma(beta, region):
    return truncated_gamma(region, float(beta[0]), float(beta[1]))


def _build_truncated_gaussian(beta, region):
    return truncated_gaussian(region, float(beta[0]), float(beta[1]))


_FAMILY_BUILDERS = {
    "pareto1": (_build_pareto1, 1),
    "power_law_shifted": (_build_power_law_shifted, 1),
    "exponential_logscale": (_build_exponential, 1),
    "gaussian_tail": (_build_gaussian_tail, 1),
    "truncated_gamma": (_build_truncated_gamma, 2),
    "truncated_gaussian": (_build_truncated_gaussian, 2),
}


def standard_family(tag: str, region: SearchRegion, box, init,
                    grad_mode: str | None = None,
                    fd_step: float | None = None) -> ParametricProposal:
    """Build a catalog family as a ParametricProposal.

    Closed-form score derivatives are wired for the power-law and exponential
    families (positive-slope boxes only; the formulas are singular at 0);
    everything else defaults to central differences.
    """
    if tag not in _FAMILY_BUILDERS:
        raise ValueError(f"no parametric family registered under tag {tag!r}")
    ctor, p = _FAMILY_BUILDERS[tag]
    box_arr = np.atleast_2d(np.asarray(box, dtype=float))
    if box_arr.shape[0] != p:
        raise ValueError(f"family {tag!r} has {p} parameter(s), box declares "
                         f"{box_arr.shape[0]}")
    grad_log = hess_log = None
    analytic_ok = False
    if tag == "pareto1" and box_arr[0, 0] > 0:
        grad_log = partial(_pareto_grad, a=region.lo, b=region.hi, shift=0.0)
        hess_log = partial(_pareto_hess, a=region.lo, b=region.hi, shift=0.0)
        analytic_ok = True
    elif tag == "power_law_shifted" and box_arr[0, 0] > 0:
        grad_log = partial(_pareto_grad, a=region.lo + 1.0, b=region.hi + 1.0, shift=1.0)
        hess_log = partial(_pareto_hess, a=region.lo + 1.0, b=region.hi + 1.0, shift=1.0)
        analytic_ok = True
    elif tag == "exponential_logscale" and box_arr[0, 0] > 0:
        grad_log = partial(_expon_grad, a=region.lo, b=region.hi)
        hess_log = partial(_expon_hess, a=region.lo, b=region.hi)
        analytic_ok = True
    if grad_mode is None:
        grad_mode = "analytic" if analytic_ok else "central_fd"
    if grad_mode == "analytic" and not analytic_ok:
        raise ValueError(f"family {tag!r} has no analytic derivatives over this box")
    return ParametricProposal(
        builder=partial(ctor, region=region), param_box=box_arr, init=init,
        grad_mode=grad_mode, fd_step=fd_step, grad_log=grad_log,
        hess_log=hess_log, name=tag)
