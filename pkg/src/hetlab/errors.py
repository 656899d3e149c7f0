class HetlabError(Exception):
    """Base class for all library errors."""


class ConstructionError(HetlabError, ValueError):
    """Kernel or potential parameters outside the admissible range."""


class EvaluationDomainError(HetlabError, ArithmeticError):
    """A kernel or integrand produced a non-finite value."""


class UnboundedInverseError(HetlabError, ArithmeticError):
    """Bracket expansion for a monotone inverse overflowed."""


class HypothesisViolation(HetlabError):
    """A sampled structural hypothesis does not hold."""


class StationaryStartError(HetlabError):
    """The Cauchy problem was started at a rest point."""


class StiffnessError(HetlabError):
    """Integrator step size underflowed before reaching the tail."""


class FitDomainError(HetlabError, ValueError):
    """Tail data not strictly positive, so a log fit is impossible."""


class DescentStallError(HetlabError):
    """Line search could not produce a decrease."""

    def __init__(self, message, iterations=None, grad_norm=None):
        super().__init__(message)
        self.iterations = iterations
        self.grad_norm = grad_norm


class NormalizationError(HetlabError, ValueError):
    """Profile never crosses the requested anchor value."""


class TailBoundError(HetlabError):
    """Decay fit unavailable for tail correction."""


class ConfigError(HetlabError, ValueError):
    """Malformed kernel, potential or run configuration."""
