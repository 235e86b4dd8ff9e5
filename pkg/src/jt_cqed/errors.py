"""Exception hierarchy shared by the numerical core and the CLI."""

from typing import Optional


class JTCQEDError(Exception):
    """Base class for every error raised by jt_cqed."""

    kind = "error"


class ConfigError(JTCQEDError):
    """
    A configuration document or parameter set failed validation.

    Args:
        message: Human readable description
        field: Dotted path of the offending field, if known
        line: 1-based line number in the config document, if known
    """

    kind = "config"

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.field = field
        self.line = line
        super().__init__(self._format())

    def __reduce__(self):
        return type(self), (self.message, self.field, self.line)

    def _format(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field:
            where.append(self.field)
        if where:
            return f"{', '.join(where)}: {self.message}"
        return self.message


class ParameterError(ConfigError, ValueError):
    """A model or dissipation parameter violates its invariants."""

    kind = "parameter"


class SpaceMismatchError(JTCQEDError, ValueError):
    """Two operators (or an operator and a parameter set) live on different spaces."""

    kind = "space"


class NumericalError(JTCQEDError, RuntimeError):
    """A linear-algebra step failed or produced an unusable result."""

    kind = "numerical"


class KernelDimensionError(NumericalError):
    """The Liouvillian null space does not have dimension one."""

    kind = "kernel"

    def __init__(self, multiplicity: int, singular_values=None):
        self.multiplicity = multiplicity
        self.singular_values = singular_values
        super().__init__(f"Liouvillian kernel has dimension {multiplicity}, expected 1")

    def __reduce__(self):
        return type(self), (self.multiplicity, self.singular_values)


class SingularResolventError(NumericalError):
    """(L - i omega) could not be inverted at some frequency."""

    kind = "resolvent"

    def __init__(self, omega: float, detail: str = ""):
        self.omega = omega
        self.detail = detail
        msg = f"singular resolvent at omega={omega:.12g}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)

    def __reduce__(self):
        return type(self), (self.omega, self.detail)


class ConvergenceError(NumericalError):
    """A solve finished but its residual is above tolerance."""

    kind = "convergence"
