"""Exception hierarchy shared by all sigcomp modules.

Every error raised by the library derives from :class:`SigcompError`, so
callers (in particular the Monte Carlo harness and the CLI) can distinguish
analysis failures from programming errors.  The class name doubles as the
machine-readable error code emitted by the CLI.
"""


class SigcompError(Exception):
    """Base class for all errors raised by sigcomp."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- density construction and evaluation ---

class NonFiniteKernel(SigcompError):
    """Kernel returned NaN, infinity, or a negative value inside the region."""


class ZeroMass(SigcompError):
    """Kernel integrates to (numerically) zero over the search region."""


class QuadratureFailure(SigcompError):
    """Numerical integration did not reach the requested tolerance."""


class RootFindFailure(SigcompError):
    """CDF inversion failed to bracket or converge."""


class LambdaOutOfRange(SigcompError):
    """Bump weight outside [0, 1/2)."""


class BumpCenterOutsideRegion(SigcompError):
    """Bump center placed outside the search region."""


# --- score geometry and two-sample estimation ---

class DegenerateSignal(SigcompError):
    """Signal and proposal densities coincide; the score direction vanishes."""


class SupportMismatch(SigcompError):
    """Densities do not share a common search region, or the proposal vanishes."""


class EmptySample(SigcompError):
    """Sample too small for the requested estimator."""


class ObservationOutsideRegion(SigcompError):
    """One or more observations lie outside the search region."""


class DegenerateDenominator(SigcompError):
    """Estimated compensator numerically equals the score norm."""


class ZeroVariance(SigcompError):
    """Plug-in variance estimate is not positive."""


# --- parametric fitting ---

class OptimizationFailure(SigcompError):
    """Likelihood maximization failed to improve or to converge."""


class NonFiniteLogLik(SigcompError):
    """Log-likelihood evaluated to NaN."""


class SingularInformation(SigcompError):
    """Observed information matrix is not invertible to tolerance."""


class FdStepInvalid(SigcompError):
    """Finite-difference step is not positive and finite."""


# --- background-free inference ---

class RegionExceedsSupport(SigcompError):
    """Requested signal region does not fit inside the search region."""


# --- misspecified-likelihood fitting ---

class FlatLikelihood(SigcompError):
    """Signal equals the proposal everywhere; the likelihood carries no information."""


class DomainError(SigcompError):
    """Argument outside the mathematical domain of the function."""


# --- Monte Carlo harness ---

class CampaignDegenerate(SigcompError):
    """More than half of the replicates of a campaign failed."""


# --- CLI ---

class ParseError(SigcompError):
    """Event file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class EmptyFile(SigcompError):
    """Event file contains no values."""


class ValueOutsideRegion(SigcompError):
    """Event values fall outside the configured search region."""


class ConfigError(SigcompError):
    """Analysis configuration is invalid or incomplete."""
