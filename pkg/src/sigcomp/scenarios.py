"""Canonical benchmark setups used across tests and experiment scripts.

Two stages are covered: a narrow-line search on [1, 2] against a smoothly
decaying background (the calibration workhorse) and a log-scale gamma-ray
energy spectrum on [0, log 35] (the realistic workflow).  Everything here is
plain composition of the density catalog and the parametric families.
"""

from __future__ import annotations

import math

from .density import (
    SearchRegion,
    DensityModel,
    exponential_logscale,
    gaussian_signal_logscale,
    gaussian_tail,
    mixture,
    pareto1,
    power_law_shifted,
    truncated_gamma,
    truncated_gaussian,
    uniform,
)
from .parametric import ParametricProposal, standard_family

__all__ = [
    "LINE_REGION",
    "LINE_BUMP",
    "ENERGY_REGION",
    "ENERGY_BUMP",
    "line_background",
    "line_signal",
    "steep_power_baseline",
    "line_pareto_family",
    "line_power_baseline_family",
    "energy_background",
    "energy_signal",
    "energy_truth",
    "energy_exponential_family",
    "energy_gaussian_tail_family",
    "energy_power_baseline_family",
    "line_truth",
    "line_uniform_proposal",
    "energy_uniform_proposal",
]

#: Narrow-line benchmark: search region, and bump centers hugging the
#: boundaries of the 99.9% signal region around the line at 1.28.
LINE_REGION = SearchRegion(1.0, 2.0)
LINE_BUMP = (1.25, 1.31, 0.08)

#: Log-scale energy benchmark on [0, log 35] with a line at energy 3.5.
ENERGY_REGION = SearchRegion(0.0, math.log(35.0))
ENERGY_BUMP = (1.07, 1.44, 0.31)


def line_background() -> DensityModel:
    """Truncated gamma decay, the true background of the line benchmark."""
    return truncated_gamma(LINE_REGION, shape=0.5, rate=3.3)


def line_signal() -> DensityModel:
    """Narrow Gaussian line at 1.28 with width 0.02."""
    return truncated_gaussian(LINE_REGION, mu=1.28, sigma=0.02)


def steep_power_baseline() -> DensityModel:
    """Misspecified power-law stand-in for the line background."""
    return pareto1(LINE_REGION, slope=4.0)


def line_truth(eta: float) -> DensityModel:
    """Mixture of line signal and gamma background at signal fraction eta."""
    if eta == 0.0:
        return line_background()
    return mixture([eta, 1.0 - eta], [line_signal(), line_background()])


def line_pareto_family(box=(0.2, 15.0), init=3.0) -> ParametricProposal:
    """Power-law proposal family for the line benchmark."""
    return standard_family("pareto1", LINE_REGION, [list(box)], [init])


def line_power_baseline_family(box=(0.2, 15.0), init=3.0) -> ParametricProposal:
    """Baseline family for the bump construction on the line benchmark."""
    return standard_family("pareto1", LINE_REGION, [list(box)], [init])


def energy_background(rate: float = 1.4) -> DensityModel:
    """Exponential energy spectrum in log scale."""
    return exponential_logscale(ENERGY_REGION, rate=rate)


def energy_signal(kappa: float = 3.5) -> DensityModel:
    """Gaussian line at energy kappa, transformed to log scale."""
    return gaussian_signal_logscale(ENERGY_REGION, kappa=kappa)


def energy_truth(eta: float, kappa: float = 3.5, rate: float = 1.4) -> DensityModel:
    if eta == 0.0:
        return energy_background(rate)
    return mixture([eta, 1.0 - eta], [energy_signal(kappa), energy_background(rate)])


def energy_exponential_family(box=(0.05, 8.0), init=1.0) -> ParametricProposal:
    return standard_family("exponential_logscale", ENERGY_REGION, [list(box)], [init])


def energy_gaussian_tail_family(box=(0.05, 8.0), init=1.0) -> ParametricProposal:
    return standard_family("gaussian_tail", ENERGY_REGION, [list(box)], [init])


def energy_power_baseline_family(box=(0.1, 10.0), init=1.5) -> ParametricProposal:
    """Shifted power-law baseline for the energy-benchmark bump construction."""
    return standard_family("power_law_shifted", ENERGY_REGION, [list(box)], [init])


def line_uniform_proposal() -> DensityModel:
    return uniform(LINE_REGION)


def energy_uniform_proposal() -> DensityModel:
    return uniform(ENERGY_REGION)
