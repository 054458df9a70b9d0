"""Exception hierarchy. Each class maps onto one CLI exit code."""


class SovlabError(Exception):
    exit_code = 4


class ParseError(SovlabError):
    exit_code = 2


class PreconditionError(SovlabError, ValueError):
    exit_code = 3


class NumericalError(SovlabError, ArithmeticError):
    exit_code = 4


class SeriesError(SovlabError, ValueError):
    """Bad series operation: anchor mismatch, zero divisor, no precision left."""
    exit_code = 4


class AnchorMismatch(SeriesError):
    pass


class TruncationError(SeriesError):
    pass


class InconsistentSystem(NumericalError):
    """Least-squares residual above tolerance: no such differential."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class DegenerateSystem(NumericalError):
    def __init__(self, msg, nullity=None):
        super().__init__(msg)
        self.nullity = nullity


class RootFindingError(NumericalError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class MomentObstruction(PreconditionError):
    """Residue theorem forbids the requested omega_0 (H differs from lambda*d)."""

    def __init__(self, msg, residue_sum=None):
        super().__init__(msg)
        self.residue_sum = residue_sum


class InvalidChart(PreconditionError):
    def __init__(self, msg, failures=None):
        super().__init__(msg)
        self.failures = failures or []


class QSpecialError(PreconditionError):
    def __init__(self, msg, dim=None, basis=None):
        super().__init__(msg)
        self.dim = dim
        self.basis = basis


class DegenerateInput(PreconditionError):
    """Non-simple zeros, collisions or other inputs outside the supported locus."""


class StencilFailure(NumericalError):
    def __init__(self, msg, direction=None):
        super().__init__(msg)
        self.direction = direction
