"""
Exception hierarchy for the square-root diffusion laboratory
"""


class LabError(Exception):
    """Base class for all laboratory errors"""


class DomainError(LabError, ValueError):
    """Input outside the domain of an operation (including NaN inputs)"""


class BesselRedirectError(DomainError):
    """A CIR-only operation was called with b = 0"""

    def __init__(self, operation, counterpart):
        super().__init__(
            f"{operation} requires b > 0; for b = 0 use {counterpart} "
            f"(convert with CirParams.to_bessel())"
        )
        self.operation = operation
        self.counterpart = counterpart


class CouplingError(LabError, ValueError):
    """Ensembles were not driven by the same seed and grid"""


class ConvergenceError(LabError, ArithmeticError):
    """A series expansion did not reach its tolerance"""


class ConfigError(LabError, ValueError):
    """Invalid experiment configuration"""
