import json
import os
from unittest.mock import MagicMock, patch

import pandas as pd
import pytest
from click.testing import CliRunner

from bassflow.cli import cli
from bassflow.common.quadrature import QuadratureRule
from bassflow.lifted import Direction, Evaluation
from bassflow.pipelines import SolvePipeline

MU = 'uniform:-0.5,0.5'
NU = 'uniform:-1,1'


def invoke(*args):
    return CliRunner().invoke(cli, [str(arg) for arg in args])


def read_json(directory, name):
    with open(os.path.join(directory, name)) as file:
        return json.load(file)


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    result = invoke('solve', '--mu', MU, '--nu', NU, '--n-atoms', 20, '--out', out)
    return result, out


def test_solve_converges(solved):
    result, out = solved
    assert result.exit_code == 0, f"Uniform pair should converge: {result.output}"
    summary = read_json(out, 'summary.json')
    assert summary['termination'] == 'GradToleranceMet', "Termination reason"
    assert summary['grad_norm_final'] <= 1e-7, "Final gradient within tolerance"
    assert summary['error'] is None, "No error block on success"
    assert summary['convex_order']['ordered'], "Convex order recorded"
    assert summary['comonotone_final'], "Flow keeps Z comonotone with X"
    assert summary['hypotheses'] == 'checked', "Hypotheses are checked on the line"


def test_solve_writes_tables(solved):
    _, out = solved
    trace = pd.read_csv(os.path.join(out, 'trace.csv'))
    assert list(trace.columns) == ['t', 'V', 'grad_norm', 'bary_1', 'max_abs_z', 'h'], "Trace columns"
    assert (trace['V'].diff().dropna() <= 1e-12).all(), "V never increases along the trace"
    bass = pd.read_csv(os.path.join(out, 'bass_measure.csv'))
    assert list(bass.columns) == ['x1', 'z1', 'w'], "Bass measure columns"
    assert len(bass) == 20, "One row per atom of mu"


def test_simulate_from_solution(solved):
    _, out = solved
    result = invoke('simulate', '--mu', MU, '--nu', NU, '--n-atoms', 20, '--n-paths', 2000, '--out', out)
    assert result.exit_code == 0, f"Simulation should succeed: {result.output}"
    summary = read_json(out, 'simulate.json')
    assert summary['n_paths'] == 2000, "Path count"
    assert summary['martingale'] is None, "Too few paths for the binned check"
    assert set(summary['marginals']) == {'t0', 't1'}, "Both marginals are checked"
    paths = pd.read_csv(os.path.join(out, 'paths.csv'))
    assert len(paths) == 2000 * 11, "Long format over the default grid"


def test_dirac_source_is_already_stationary(tmp_path):
    result = invoke('solve', '--mu', 'dirac:0', '--nu', NU, '--out', tmp_path)
    assert result.exit_code == 0, "delta_0 needs no flow against a symmetric target"
    assert read_json(tmp_path, 'summary.json')['steps'] == 0, "No Euler step taken"


def test_not_in_convex_order(tmp_path):
    result = invoke('solve', '--mu', 'uniform:-2,2', '--nu', NU, '--out', tmp_path)
    assert result.exit_code == 3, "Failed precondition exits with 3"
    summary = read_json(tmp_path, 'summary.json')
    assert summary['error']['type'] == 'NotInConvexOrder', "Error block names the failure"
    assert not os.path.exists(os.path.join(tmp_path, 'trace.csv')), "No trace without a flow"


@pytest.mark.parametrize("args", [
    ['--mu', 'gauss:0,1', '--nu', NU],
    ['--mu', MU, '--nu', 'uniform:1,-1'],
    ['--mu', MU, '--nu', NU, '--n-atoms', 1],
    ['--mu', MU],
])
def test_bad_input_exits_with_precondition_code(tmp_path, args):
    assert invoke('solve', *args, '--out', tmp_path).exit_code == 3, "Bad input exits with 3"


def test_outputs_are_reproducible(tmp_path):
    args = ['solve', '--mu', MU, '--nu', NU, '--n-atoms', 10, '--t-max', 1.0, '--out', tmp_path]
    names = ['summary.json', 'trace.csv', 'bass_measure.csv']

    assert invoke(*args).exit_code == 2, "Short horizon stops at t_max"
    first = {name: (tmp_path / name).read_bytes() for name in names}
    invoke(*args)
    for name in names:
        assert (tmp_path / name).read_bytes() == first[name], f"{name} should be byte-identical"


def test_flags_override_config_file(tmp_path):
    config = tmp_path / 'solve.json'
    config.write_text(json.dumps({'mu': MU, 'nu': NU, 'n-atoms': 10, 't_max': 5.0}))
    result = invoke('solve', '--config', config, '--t-max', 0.3, '--out', tmp_path)
    assert result.exit_code == 2, "Horizon of 0.3 is too short to converge"
    summary = read_json(tmp_path, 'summary.json')
    assert summary['config']['t_max'] == 0.3, "Flag wins over the file"
    assert summary['config']['n_atoms'] == 10, "File wins over the default"
    assert summary['t_final'] == pytest.approx(0.3), "Flow stops at the horizon"


def test_unknown_config_key(tmp_path):
    config = tmp_path / 'solve.json'
    config.write_text(json.dumps({'mu': MU, 'nu': NU, 'atoms': 10}))
    assert invoke('solve', '--config', config, '--out', tmp_path).exit_code == 3, "Unknown keys are rejected"


def test_step_underflow_exit_code(tmp_path):
    functional = MagicMock(rule=QuadratureRule())
    functional.pushforward_term.return_value = 0.0
    # gradient of the second moment with the wrong sign
    functional.evaluate.side_effect = lambda s: Evaluation(value=s.second_moment(), gradient=Direction(-2.0 * s.z))

    with patch.object(SolvePipeline, 'functional', return_value=functional):
        result = invoke('solve', '--mu', MU, '--nu', NU, '--n-atoms', 10, '--out', tmp_path)
    assert result.exit_code == 4, "No descent direction ends in a step underflow"
    assert read_json(tmp_path, 'summary.json')['termination'] == 'StepUnderflow', "Termination reason"


def test_check_command(tmp_path):
    assert invoke('check', '--mu', MU, '--nu', NU, '--n-atoms', 20, '--out', tmp_path).exit_code == 0, \
        "Ordered marginals pass the check"
    report = read_json(tmp_path, 'check.json')
    assert report['convex_order']['ordered'], "Convex order holds"
    assert report['irreducibility']['irreducible'], "Strict potential inequality inside (-1, 1)"


def test_oracle_command(tmp_path):
    result = invoke('oracle', '--mu', 'uniform:-0.3,0.3', '--nu', NU, '--n-atoms', 2, '--budget', 300,
                    '--out', tmp_path)
    assert result.exit_code == 0, f"Small oracle run should succeed: {result.output}"
    assert read_json(tmp_path, 'oracle.json')['oracle']['value'] >= 0.0, "The Bass functional is nonnegative"


def test_oracle_atom_limit(tmp_path):
    result = invoke('oracle', '--mu', MU, '--nu', NU, '--n-atoms', 17, '--out', tmp_path)
    assert result.exit_code == 3, "More than 16 atoms is a spec error"


def test_planar_run_labels_hypotheses_unverified(tmp_path):
    square = [[-0.2, -0.2], [0.2, -0.2], [-0.2, 0.2], [0.2, 0.2]]
    pd.DataFrame({'x1': [p[0] for p in square], 'x2': [p[1] for p in square], 'w': 1.0}).to_csv(
        tmp_path / 'mu.csv', index=False)
    pd.DataFrame({'x1': [-1.0, 1.0, -1.0, 1.0], 'x2': [-1.0, -1.0, 1.0, 1.0], 'w': 1.0}).to_csv(
        tmp_path / 'nu.csv', index=False)

    result = invoke('solve', '--mu', f"csv:{tmp_path / 'mu.csv'}", '--nu', f"csv:{tmp_path / 'nu.csv'}",
                    '--samples-per-atom', 512, '--t-max', 0.4, '--out', tmp_path / 'run')
    assert result.exit_code in (0, 2), f"A short planar run should finish: {result.output}"
    summary = read_json(tmp_path / 'run', 'summary.json')
    assert summary['hypotheses'] == 'unverified', "Convex order and irreducibility are not checked in d >= 2"
    assert summary['convex_order']['status'] == 'unknown', "Convex order status stays unknown"
