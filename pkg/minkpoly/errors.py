"""
Exceptions raised by the minkpoly toolkit.

Every error carries an exit code for the command-line front end and can be
rendered as the JSON payload that the CLI prints on failure.
"""
from typing import Any, Dict, List, Optional


class MinkpolyError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_payload(self) -> Dict[str, Any]:
        payload = {"success": False, "error": type(self).__name__, "message": self.message}
        payload.update(self.details)
        return payload


class ConfigError(MinkpolyError):
    pass


class EnumerationTooLarge(MinkpolyError):
    def __init__(self, n: int, cap: int):
        super().__init__(f"subset enumeration needs n <= {cap}, got n = {n}", n=n, cap=cap)


class NonGeneric(MinkpolyError):
    """Raised when some ε_S lies within the genericity margin (a wall-crossing weight)."""

    def __init__(self, min_abs_epsilon: float, subset: Optional[str] = None):
        super().__init__(
            f"weights are not generic: |eps_S| = {min_abs_epsilon:.3e}"
            + (f" for S = {subset}" if subset else ""),
            min_abs_epsilon=min_abs_epsilon,
            subset=subset,
        )


class ZeroVector(MinkpolyError):
    def __init__(self, index: int):
        super().__init__(f"q_{index + 1} vanishes", index=index + 1)
        self.index = index


class NotStable(MinkpolyError):
    def __init__(self, reason: str, subset: Optional[str] = None):
        super().__init__(f"configuration is not alpha-stable: {reason}", subset=subset)


class SamplerFailed(MinkpolyError):
    def __init__(self, attempts: int):
        super().__init__(f"no admissible sample after {attempts} attempts", attempts=attempts)


class NotOnLevelSet(MinkpolyError):
    def __init__(self, residual: float, what: str = "real moment map"):
        super().__init__(f"not on the {what} level set (residual {residual:.3e})", residual=residual)


class NotOnComplexLevel(MinkpolyError):
    def __init__(self, residual: float):
        super().__init__(f"not on the complex moment map zero level (residual {residual:.3e})", residual=residual)


class NoConvergence(MinkpolyError):
    exit_code = 2

    def __init__(self, max_iters: int, residual: float):
        super().__init__(
            f"solver did not converge in {max_iters} iterations (residual {residual:.3e})",
            max_iters=max_iters,
            residual=residual,
        )
        self.residual = residual


class NotFixed(MinkpolyError):
    pass


class IndexDegenerate(MinkpolyError):
    pass


class FitFailed(MinkpolyError):
    def __init__(self, residual: float):
        super().__init__(f"integer weight fit failed (residual {residual:.3e})", residual=residual)


class IdentityViolated(MinkpolyError):
    def __init__(self, name: str, magnitude: float):
        super().__init__(f"identity {name} violated by {magnitude:.3e}", name=name, magnitude=magnitude)
        self.name = name
        self.magnitude = magnitude


class NotZComponent(MinkpolyError):
    pass


class CensusMismatch(MinkpolyError):
    pass


class DegenerateDiagonal(MinkpolyError):
    pass


class NotTangent(MinkpolyError):
    pass


class NotTimelike(MinkpolyError):
    pass


class NotNormalized(MinkpolyError):
    pass


class NotClosed(MinkpolyError):
    def __init__(self, residual: float):
        super().__init__(f"polygon does not close (residual {residual:.3e})", residual=residual)


class OffPseudosphere(MinkpolyError):
    """A side has the wrong Minkowski norm or lies on the wrong sheet."""

    def __init__(self, violations: List[str]):
        super().__init__("; ".join(violations), violations=violations)


class CompactCase(MinkpolyError):
    def __init__(self, k1: int, k2: int):
        super().__init__(f"M^{{{k1},{k2}}} is compact; no escaping sequence exists", k1=k1, k2=k2)


class NotCanonical(MinkpolyError):
    pass


class WeightOutOfRange(MinkpolyError):
    pass


class MarkedPointsNotDistinct(MinkpolyError):
    pass


class ParseError(MinkpolyError):
    def __init__(self, line: Optional[int], reason: str):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}", line=line, reason=reason)
        self.line = line
        self.reason = reason


class SchemaMismatch(MinkpolyError):
    pass
