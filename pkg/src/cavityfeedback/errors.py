"""Exception types shared across the library."""


class CavityFeedbackError(Exception):
    """Base class for all library-specific errors."""


class TruncationError(CavityFeedbackError):
    """The truncated Fock basis cannot represent the requested state or map."""


class DegenerateCatError(CavityFeedbackError):
    """Odd cat state requested with a vanishing coherent amplitude."""


class DimMismatchError(CavityFeedbackError):
    """Operands live in Fock bases of different dimension."""


class GridTooCoarseError(CavityFeedbackError):
    """Phase-space quadrature on the given grid misses the known integral."""


class UnboundedError(CavityFeedbackError):
    """The requested optimisation has no finite solution."""


class NonUniqueFixedPointError(CavityFeedbackError):
    """More than one eigenvalue of the step matrix sits at 1."""


class DegenerateError(CavityFeedbackError):
    """Both couplings vanish; the dark state is undefined."""


class StepTooCoarseError(CavityFeedbackError):
    """Halving the integrator step changed the result beyond tolerance."""


class NumericalInvariantError(CavityFeedbackError):
    """A runtime self-check (trace, positivity, quadrature) failed."""


class ConfigError(CavityFeedbackError):
    """Invalid experiment configuration."""

    def __init__(self, param: str, message: str):
        self.param = param
        super().__init__(f"{param}: {message}")
