import pytest

from bassflow.common.errors import (EXIT_PRECONDITION, EXIT_STEP_UNDERFLOW,
                                    BassFlowError, DimensionMismatch,
                                    NoConvergence, NotInConvexOrder,
                                    SpecError, StepUnderflow)


@pytest.mark.parametrize("error", [SpecError, NotInConvexOrder, DimensionMismatch])
def test_default_exit_code(error):
    exc = error("boom") if error is not NotInConvexOrder else error("boom", witness=0.5)
    assert exc.exit_code == EXIT_PRECONDITION, "Errors map to the precondition exit code by default"
    assert isinstance(exc, BassFlowError), "Every error derives from BassFlowError"


def test_step_underflow_exit_code():
    assert StepUnderflow("no descent").exit_code == EXIT_STEP_UNDERFLOW, "Underflow has its own exit code"


def test_exit_code_override():
    assert SpecError("boom", exit_code=4).exit_code == 4, "Explicit exit codes win"


def test_to_dict():
    assert SpecError("bad grammar").to_dict() == {"type": "SpecError", "message": "bad grammar"}, \
        "Error block carries type and message"
    assert NotInConvexOrder("not ordered", witness=1.5).to_dict()["witness"] == 1.5, "Witness is reported"


def test_no_convergence_keeps_residual():
    exc = NoConvergence("unbalanced", residual=0.01)
    assert exc.residual == 0.01 and exc.message == "unbalanced", "Residual travels with the error"
