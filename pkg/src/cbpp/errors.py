"""Exception hierarchy shared across the toolkit."""


class CBPPError(Exception):
    """Base class for every error raised by :mod:`cbpp`."""


class InstanceError(CBPPError, ValueError):
    """An instance violates its structural invariants."""


class MalformedMultisetError(CBPPError, ValueError):
    """A multiset references unknown items or exceeds demands."""


class InfeasibleMultisetError(CBPPError, ValueError):
    """A multiset has color discrepancy above one and cannot alternate."""


class GuardError(CBPPError):
    """A brute-force routine refused an input that exceeds its size guard."""


class ModelError(CBPPError):
    """A graph/instance mismatch or a malformed linear model."""


class EmissionError(CBPPError):
    """The LP file writer cannot represent the model."""


class LPParseError(CBPPError):
    """An LP file could not be read back."""


class SolverError(CBPPError):
    """The relaxation solver failed numerically."""


class BackendError(CBPPError):
    """An external solver run failed or returned an unusable answer."""


class SolutionParseError(BackendError):
    """A solution file does not follow the documented grammar."""


class DecompositionError(CBPPError):
    """A flow could not be decomposed into color-alternating paths."""


class AdaptationError(CBPPError):
    """A claimed bin-packing solution is not valid for adaptation."""


class GeneratorError(CBPPError, ValueError):
    """A generator configuration cannot produce instances."""


class FormatError(CBPPError, ValueError):
    """An instance or solution file is malformed."""
