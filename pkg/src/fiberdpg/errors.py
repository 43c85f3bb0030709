"""Exception types raised by the simulator."""


class FiberDPGError(Exception):
    """Base class for all simulator errors."""


class InvalidParameterError(FiberDPGError, ValueError):
    """A physical or numerical parameter is out of its admissible range."""


class ConfigError(FiberDPGError, ValueError):
    """Malformed configuration text or an inconsistent simulation setup."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalBreakdownError(FiberDPGError, ArithmeticError):
    """A local Gram or stiffness factorization failed."""

    def __init__(self, message, element=None):
        self.element = element
        if element is not None:
            message = f"element {element}: {message}"
        super().__init__(message)


class SingularSystemError(FiberDPGError, ArithmeticError):
    """A pivot block of the layered solver is singular."""

    def __init__(self, message, layer=None):
        self.layer = layer
        if layer is not None:
            message = f"layer {layer}: {message}"
        super().__init__(message)


class NonConvergenceError(FiberDPGError, RuntimeError):
    """Picard iteration hit its iteration cap; carries the partial history."""

    def __init__(self, message, history=None):
        self.history = history
        super().__init__(message)


class UndefinedEfficiencyError(FiberDPGError, ValueError):
    """Efficiency requested where essentially no pump power was absorbed."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)
