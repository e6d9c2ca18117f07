"""
Error hierarchy for the stratified Couette toolkit.

Every failure raised by the backend derives from StratCouetteError so that the
CLI layer can turn it into a status dict with a single except clause:
- domain / parameter errors (bad inputs, poles, branch cuts, degenerate indices)
- numerical errors (non-convergence, tolerance not met, resolution limits)
- configuration errors (raised before any computation starts)
"""


class StratCouetteError(Exception):
    """
    Base error. Carries a human readable message and optional details.
    Not derived from ValueError so pydantic validators re-raise it unchanged.
    """

    exit_code = 2

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = dict(details or {})

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": {k: repr(v) for k, v in self.details.items()},
        }


class DomainError(StratCouetteError):
    """Input outside the domain of an operation."""


class PoleError(DomainError):
    """Gamma function evaluated at a nonpositive integer."""


class BranchCutError(DomainError):
    """Argument lies on the branch cut (-inf, 0]."""


class DegenerateIndexError(DomainError):
    """Whittaker index makes 1 +/- 2*gamma a nonpositive integer."""


class NearDegenerateIndexError(DomainError):
    """0 < |gamma| < 1e-8: the connection formula cancels catastrophically."""


class NonConvergenceError(StratCouetteError):
    """A series or iteration did not reach its tail bound."""


class ToleranceNotMetError(StratCouetteError):
    """Quadrature refinement estimate exceeds the requested tolerance."""

    def __init__(self, message: str, achieved: float, tolerance: float, details: dict | None = None):
        merged = {"achieved": achieved, "tolerance": tolerance}
        merged.update(details or {})
        super().__init__(message, merged)
        self.achieved = achieved
        self.tolerance = tolerance


class ResolutionError(StratCouetteError):
    """Grid cannot resolve the phase mixing up to the requested time."""

    def __init__(self, message: str, max_t_end: float, details: dict | None = None):
        merged = {"max_t_end": max_t_end}
        merged.update(details or {})
        super().__init__(message, merged)
        self.max_t_end = max_t_end


class StepTooLargeError(StratCouetteError):
    """Finite-difference step straddles a near-singularity."""


class ConfigError(StratCouetteError):
    """Invalid run configuration."""

    exit_code = 3
