import json
import math

import numpy as np
import pytest

from bassflow.common.config import dumps, load_config, merge_options
from bassflow.common.errors import SpecError


def test_dumps_writes_full_precision():
    assert json.loads(dumps({'h': 0.1})) == {'h': 0.1}, "Output is valid JSON"
    assert '0.10000000000000001' in dumps({'h': 0.1}), "Floats at 17 significant digits"


def test_dumps_non_finite_and_numpy():
    document = json.loads(dumps({'a': math.inf, 'b': math.nan, 'c': np.float64(2.5), 'd': np.int64(3),
                                 'e': [True, None], 'f': {}, 'g': []}))
    assert document == {'a': None, 'b': None, 'c': 2.5, 'd': 3, 'e': [True, None], 'f': {}, 'g': []}, \
        "Non-finite floats become null and numpy scalars are unwrapped"


def test_dumps_is_deterministic():
    document = {'rates': {'kappa_v': 1.0 / 3.0}, 'steps': 12}
    assert dumps(document) == dumps(dict(document)), "Same document, same text"


def test_dumps_rejects_objects():
    with pytest.raises(TypeError):
        dumps({'x': object()})


def test_load_config_normalises_keys(tmp_path):
    path = tmp_path / 'solve.json'
    path.write_text(json.dumps({'n-atoms': 10, 'quad_order': 32}))
    assert load_config(str(path)) == {'n_atoms': 10, 'quad_order': 32}, "Dashes become underscores"
    assert load_config(None) == {}, "No file, no entries"


@pytest.mark.parametrize("text", ['{"n_atoms": ', '[1, 2]'])
def test_load_config_errors(tmp_path, text):
    path = tmp_path / 'solve.json'
    path.write_text(text)
    with pytest.raises(SpecError):
        load_config(str(path))


def test_load_config_missing_file(tmp_path):
    with pytest.raises(SpecError):
        load_config(str(tmp_path / 'absent.json'))


def test_merge_options():
    merged = merge_options({'a': 1, 'b': None}, {'b': 2, 'c': None}, {'a': 0, 'b': 0, 'c': 0, 'd': 0})
    assert merged == {'a': 1, 'b': 2, 'c': 0, 'd': 0}, "Flags over file over defaults, None means unset"
