"""Exception types raised across the package."""


class OrientwaveError(Exception):
    """Base class for every error raised by orientwave."""


class ZeroWavenumber(OrientwaveError, ValueError):
    pass


class DegenerateDirection(OrientwaveError, ValueError):
    """The wavenumber is parallel to the director, so a branch is degenerate."""


class NonStrict(OrientwaveError, ValueError):
    """Splay and twist constants coincide (alpha == beta)."""


class CflViolation(OrientwaveError, ValueError):
    pass


class AngleOutOfBand(OrientwaveError, RuntimeError):
    """The polar angle left the safe band where cot(phi) stays bounded."""


class BadBaseAngle(OrientwaveError, ValueError):
    pass


class BlowUp(OrientwaveError, ArithmeticError):
    def __init__(self, message: str, t_star: float):
        super().__init__(message)
        self.t_star = t_star


class IncompatibleData(OrientwaveError, ValueError):
    pass


class ConstantProfile(OrientwaveError, ValueError):
    pass


class AfterBlowUp(OrientwaveError, ValueError):
    pass


class OutOfWindow(OrientwaveError, ValueError):
    pass


class DegenerateJacobian(OrientwaveError, ArithmeticError):
    pass


class SingularOperator(OrientwaveError, ArithmeticError):
    pass


class NegativeDensity(OrientwaveError, ValueError):
    pass


class BlowUpDetected(OrientwaveError, RuntimeError):
    def __init__(self, message: str, time: float, max_gradient: float):
        super().__init__(message)
        self.time = time
        self.max_gradient = max_gradient


class NonPeriodicOrbit(OrientwaveError, RuntimeError):
    pass


class HyperbolicityLoss(OrientwaveError, RuntimeError):
    pass


class ZeroLambda(OrientwaveError, ArithmeticError):
    pass


class RadialDegeneracy(OrientwaveError, RuntimeError):
    pass


class NotOrthogonal(OrientwaveError, ValueError):
    pass


class ParseError(OrientwaveError, ValueError):
    pass


class ValidationError(OrientwaveError, ValueError):
    pass


class IoError(OrientwaveError, OSError):
    pass
