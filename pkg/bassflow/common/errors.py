from typing import Optional

EXIT_OK = 0
EXIT_T_MAX = 2
EXIT_PRECONDITION = 3
EXIT_STEP_UNDERFLOW = 4


class BassFlowError(Exception):
    """
    Base exception for every failure raised by bassflow.

    Attributes:
        message (str): The error message associated with the exception.
        exit_code (int): The process exit code the command line maps this error to.
    """
    EXIT_CODE: int = EXIT_PRECONDITION

    def __init__(self, message: str, exit_code: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.exit_code = self.EXIT_CODE if exit_code is None else exit_code

    def to_dict(self) -> dict:
        return {"type": type(self).__name__, "message": self.message}


class MeasureError(BassFlowError):
    pass


class NonPositiveWeight(MeasureError):
    pass


class WeightSumMismatch(MeasureError):
    pass


class DimensionMismatch(MeasureError):
    pass


class UnsupportedDimension(MeasureError):
    pass


class LPSizeExceeded(MeasureError):
    pass


class NotInConvexOrder(MeasureError):
    """
    Raised when a pair of marginals fails the convex-order check.

    Attributes:
        witness (Optional[float]): A point where the potential of mu exceeds the potential of nu.
    """
    def __init__(self, message: str, witness: Optional[float] = None):
        super().__init__(message)
        self.witness = witness

    def to_dict(self) -> dict:
        return {**super().to_dict(), "witness": self.witness}


class QuantileUndefined(MeasureError):
    pass


class DensityRequired(MeasureError):
    pass


class LiftedError(BassFlowError):
    pass


class DegenerateKernel(LiftedError):
    pass


class MeanNotZero(LiftedError):
    pass


class ZeroDirection(LiftedError):
    pass


class IdenticalStates(LiftedError):
    pass


class BaseMismatch(LiftedError):
    pass


class FlowError(BassFlowError):
    pass


class InvalidConfig(FlowError):
    pass


class StepUnderflow(FlowError):
    EXIT_CODE = EXIT_STEP_UNDERFLOW


class InsufficientTrace(FlowError):
    pass


class CertificateError(BassFlowError):
    pass


class DeltaTooLarge(CertificateError):
    pass


class SupportNotInterior(CertificateError):
    pass


class SupportNotCompact(CertificateError):
    pass


class SemiDiscreteError(BassFlowError):
    pass


class NoConvergence(SemiDiscreteError):
    """
    Raised when the semi-discrete dual does not balance the cell masses within the iteration budget.

    Attributes:
        residual (float): The largest per-cell mass deviation reached.
    """
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class MartingaleError(BassFlowError):
    pass


class NotStationary(MartingaleError):
    pass


class TimeNotOnGrid(MartingaleError):
    pass


class TooFewPaths(MartingaleError):
    pass


class OracleError(BassFlowError):
    pass


class BudgetExhausted(OracleError):
    pass


class SpecError(BassFlowError):
    pass
