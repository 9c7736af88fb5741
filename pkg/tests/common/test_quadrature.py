import logging

import numpy as np
import pytest

from bassflow.common.errors import BassFlowError, InvalidConfig
from bassflow.common.quadrature import QuadratureRule


def test_rule_integrates_gaussian_moments():
    rule = QuadratureRule(16)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15), "Weights are probabilities"
    assert rule.expect(rule.nodes) == pytest.approx(0.0, abs=1e-15), "Symmetric nodes give a zero mean"
    assert rule.expect(rule.nodes ** 2) == pytest.approx(1.0, rel=1e-12), "Unit variance"
    assert np.allclose(rule.scaled(4.0), 2.0 * rule.nodes), "Scaling by the standard deviation"


@pytest.mark.parametrize("order", [0, -3])
def test_order_must_be_positive(order, caplog):
    with caplog.at_level(logging.ERROR, logger='bassflow.common.quadrature'):
        with pytest.raises(InvalidConfig) as excinfo:
            QuadratureRule(order)
    assert isinstance(excinfo.value, BassFlowError), "Configuration errors belong to the package hierarchy"
    assert "not positive" in caplog.text, "The failure is logged before raising"
