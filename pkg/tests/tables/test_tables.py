import numpy as np
import pandas as pd
import pytest

from bassflow.common.errors import NonPositiveWeight, SpecError
from bassflow.tables import (BassMeasureTable, MarginalTable, PathsTable,
                             TraceTable, read_marginal)
from bassflow.tables.base import infer_dim


@pytest.fixture(scope="module")
def cloud():
    return pd.DataFrame({'x1': [0.0, 1.0, -1.0], 'x2': [2.0, 0.5, 0.1], 'w': [0.5, 0.25, 0.25]})


def test_coordinate_columns_expand():
    assert BassMeasureTable(dim=2).columns == ['x1', 'x2', 'z1', 'z2', 'w'], "x and z per coordinate"
    assert TraceTable(dim=3).columns == ['t', 'V', 'grad_norm', 'bary_1', 'bary_2', 'bary_3', 'max_abs_z', 'h'], \
        "One barycenter column per coordinate"
    assert PathsTable().columns == ['path_id', 't', 'M', 'B'], "Paths columns"


def test_write_keeps_full_precision(tmp_path):
    table = MarginalTable(str(tmp_path))
    table.write(pd.DataFrame({'x1': [0.1, 1.0 / 3.0], 'w': [0.5, 0.5]}))
    text = (tmp_path / 'marginal.csv').read_text().splitlines()
    assert text[0] == 'x1,w', "Header in schema order"
    assert text[1].startswith('0.10000000000000001,'), "Floats at 17 significant digits"
    assert table.read()["x1"].iloc[1] == pytest.approx(1.0 / 3.0, rel=1e-15), "Values survive the file"


def test_write_drops_extra_columns(tmp_path, cloud):
    MarginalTable(str(tmp_path), dim=1).write(cloud)
    assert list(pd.read_csv(tmp_path / 'marginal.csv').columns) == ['x1', 'w'], "Only schema columns are written"


def test_missing_column(tmp_path, cloud):
    with pytest.raises(SpecError):
        BassMeasureTable(str(tmp_path), dim=2).write(cloud)
    cloud.to_csv(tmp_path / 'bass_measure.csv', index=False)
    with pytest.raises(SpecError):
        BassMeasureTable(str(tmp_path), dim=2).read()


def test_unreadable_file(tmp_path):
    with pytest.raises(SpecError):
        TraceTable(str(tmp_path)).read()


def test_infer_dim(tmp_path, cloud):
    cloud.to_csv(tmp_path / 'cloud.csv', index=False)
    assert infer_dim(str(tmp_path / 'cloud.csv')) == 2, "x1 and x2 present"
    with pytest.raises(SpecError):
        infer_dim(str(tmp_path / 'cloud.csv'), prefix='z')


def test_read_marginal_renormalises(tmp_path):
    pd.DataFrame({'x1': [-1.0, 1.0], 'w': [0.5, 0.5 + 1e-12]}).to_csv(tmp_path / 'nu.csv', index=False)
    measure = read_marginal(str(tmp_path / 'nu.csv'))
    assert measure.dim == 1, "One coordinate column"
    assert np.sum(measure.weights) == pytest.approx(1.0, abs=1e-15), "Weights renormalised on load"


def test_read_marginal_accepts_counts(tmp_path):
    pd.DataFrame({'x1': [-1.0, 1.0, 3.0], 'w': [1.0, 1.0, 2.0]}).to_csv(tmp_path / 'nu.csv', index=False)
    measure = read_marginal(str(tmp_path / 'nu.csv'))
    assert np.allclose(measure.weights, [0.25, 0.25, 0.5], rtol=0.0, atol=1e-15), "Counts become probabilities"


def test_read_marginal_rejects_non_positive_weights(tmp_path):
    pd.DataFrame({'x1': [-1.0, 1.0], 'w': [1.5, -0.5]}).to_csv(tmp_path / 'nu.csv', index=False)
    with pytest.raises(NonPositiveWeight):
        read_marginal(str(tmp_path / 'nu.csv'))


def test_read_marginal_in_two_dimensions(tmp_path, cloud):
    cloud.to_csv(tmp_path / 'nu.csv', index=False)
    measure = read_marginal(str(tmp_path / 'nu.csv'))
    assert measure.points.shape == (3, 2), "Three atoms in the plane"
