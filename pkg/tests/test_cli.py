import io
import json

import pytest

import coalesce


def run(capsys, *argv):
    code = coalesce.main([str(arg) for arg in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_coalesce_random_classes(capsys, fixtures):
    data = report(capsys, 'coalesce', '--measure', fixtures / 'random_classes_measure.json')
    assert data['k'] == 2
    assert data['deterministic'] is False
    assert sorted(data['limit_partitions']) == [[[1, 3], [2, 4]], [[1, 4], [2, 3]]]
    assert list(data) == ['k', 'deterministic', 'limit_partitions', 'reachable_census',
                          'block_sizes', 'block_sizes_agree']


def test_nonblock_pipes_into_coalesce(capsys, monkeypatch):
    constructed = report(capsys, 'construct-nonblock', '--n', 6, '--ell', 2)
    monkeypatch.setattr('sys.stdin', io.StringIO(json.dumps(constructed)))
    data = report(capsys, 'coalesce', '--measure', '-')
    assert data['k'] == 2
    assert data['deterministic'] is False


def test_member_dimension_mismatch_is_a_domain_error(capsys, fixtures):
    code, out, err = run(capsys, 'member', '--matrix', fixtures / 'uniform_4.json',
                         '--functions', fixtures / 'linked_three_state.json')
    assert code == 1
    assert out == ''
    assert err.startswith('DimensionMismatch:')


def test_member_linked_set(capsys, fixtures, tmp_path):
    matrix = tmp_path / 'p3.json'
    matrix.write_text(json.dumps({'rows': [['1/3'] * 3] * 3}))
    data = report(capsys, 'member', '--matrix', matrix, '--functions', fixtures / 'linked_three_state.json')
    assert data['feasible'] is True
    assert data['mode'] == 'subset-support'
    assert data['witness']['n'] == 3


def test_member_exact(capsys, tmp_path):
    matrix = tmp_path / 'p2.json'
    matrix.write_text(json.dumps({'rows': [['1/2', '1/2'], ['1/2', '1/2']]}))
    functions = tmp_path / 'all2.json'
    functions.write_text(json.dumps({'n': 2, 'members': ['(11)', '(12)', '(21)', '(22)']}))
    data = report(capsys, 'member', '--matrix', matrix, '--functions', functions, '--mode', 'exact')
    assert data['feasible'] is True
    assert data['mode'] == 'exact-support'
    assert data['min_weight'] == '1/4'
    assert len(data['witness']['atoms']) == 4


def test_validate_and_invariant(capsys, fixtures):
    data = report(capsys, 'validate', '--matrix', fixtures / 'random_float_3.json')
    assert data['valid'] is True
    assert data['matrix']['mode'] == 'float'

    data = report(capsys, 'invariant', '--matrix', fixtures / 'two_block_matrix.json')
    assert data['weights'] == ['1/4'] * 4


def test_row_sum_error(capsys, tmp_path):
    matrix = tmp_path / 'bad.json'
    matrix.write_text(json.dumps({'rows': [['1/2', '1/4'], ['0', '1']]}))
    code, out, err = run(capsys, 'validate', '--matrix', matrix)
    assert code == 1
    assert err.startswith('RowSumNotOne: Row 1')


def test_malformed_json(capsys, tmp_path):
    matrix = tmp_path / 'bad.json'
    matrix.write_text('{"rows": [')
    code, _, err = run(capsys, 'validate', '--matrix', matrix)
    assert code == 1
    assert err.startswith('InvalidInput:')


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as caught:
        coalesce.main(['period'])
    assert caught.value.code == 2
    assert '--matrix' in capsys.readouterr().err

    with pytest.raises(SystemExit) as caught:
        coalesce.main(['no-such-subcommand'])
    assert caught.value.code == 2


def test_simulate_is_byte_identical_per_seed(capsys, fixtures):
    argv = ['simulate', '--measure', fixtures / 'random_classes_measure.json', '--seed', 12]
    first, second = run(capsys, *argv), run(capsys, *argv)
    assert first == second
    data = json.loads(first[1])
    assert data['seed'] == 12
    assert data['status'] == 'stabilized'


def test_cftp_reports_its_seed(capsys, fixtures):
    data = report(capsys, 'cftp', '--measure', fixtures / 'permutation_pair_measure.json', '--horizon', 50)
    assert data == {'seed': 0, 'status': 'DidNotCoalesce', 'steps': 50}


def test_lumping_subcommands(capsys, fixtures):
    data = report(capsys, 'lump', '--matrix', fixtures / 'lumpable_matrix.json',
                  '--partition', fixtures / 'two_blocks.json')
    assert data['lumpable'] is True
    assert data['lambda']['rows'] == [['1/2', '1/2'], ['1/2', '1/2']]

    data = report(capsys, 'necessary', '--matrix', fixtures / 'two_block_matrix.json',
                  '--partition', fixtures / 'two_blocks.json')
    assert data['lambda_doubly_stochastic'] is True

    data = report(capsys, 'lump-all', '--matrix', fixtures / 'two_block_matrix.json')
    assert [[1, 2], [3, 4]] in [entry['partition'] for entry in data['partitions']]


def test_blockcheck_and_classes(capsys, fixtures):
    data = report(capsys, 'blockcheck', '--measure', fixtures / 'crossing_pair_measure.json',
                  '--partition', fixtures / 'two_blocks.json')
    assert data['is_block'] is False

    data = report(capsys, 'classes', '--measure', fixtures / 'permutation_pair_measure.json')
    assert data == {'is_block': True, 'k': 4, 'partition': [[1], [2], [3], [4]]}


def test_product_with_rho(capsys, fixtures):
    data = report(capsys, 'product', '--matrix', fixtures / 'two_block_matrix.json',
                  '--partition', fixtures / 'two_blocks.json', '--rho', fixtures / 'swap_rho.json')
    assert len(data['atoms']) == 17

    data = report(capsys, 'product', '--matrix', fixtures / 'two_block_matrix.json',
                  '--partition', fixtures / 'two_blocks.json', '--verify')
    assert data == {'block_measure': True}


def test_product_precondition(capsys, fixtures, tmp_path):
    matrix = tmp_path / 'p.json'
    matrix.write_text(json.dumps({'rows': [['1/2', '0', '1/2'], ['0', '1/2', '1/2'], ['1/2', '1/2', '0']]}))
    partition = tmp_path / 'blocks.json'
    partition.write_text('[[1, 2], [3]]')
    code, out, err = run(capsys, 'product', '--matrix', matrix, '--partition', partition)
    assert code == 1
    assert out == ''
    assert err.startswith('PreconditionFailed:')


def test_constructions(capsys, fixtures):
    data = report(capsys, 'construct-pnblock', '--n', 4, '--ell', 2)
    assert len(data['atoms']) == 4
    assert {atom['weight'] for atom in data['atoms']} == {'1/4'}

    code, _, err = run(capsys, 'construct-pnblock', '--n', 6, '--ell', 4)
    assert code == 1
    assert err.startswith('NotADivisor:')

    data = report(capsys, 'universal-block', '--partition', fixtures / 'two_blocks.json')
    assert len(data['atoms']) == 8


def test_matrix_subcommands(capsys, fixtures):
    assert report(capsys, 'period', '--matrix', fixtures / 'uniform_4.json') == {
        'period': 1, 'classes': [[1, 2, 3, 4]]}
    data = report(capsys, 'bvn', '--matrix', fixtures / 'two_block_matrix.json')
    assert len(data['terms']) >= 2
    data = report(capsys, 'kmax', '--matrix', fixtures / 'uniform_4.json')
    assert (data['lower'], data['upper']) == (1, 4)
    data = report(capsys, 'unique', '--matrix', fixtures / 'uniform_4.json')
    assert data['unique'] is False
    data = report(capsys, 'indep', '--matrix', fixtures / 'lumpable_matrix.json')
    assert len(data['atoms']) == 16


def test_pairwise(capsys, fixtures):
    data = report(capsys, 'pairwise', '--measure', fixtures / 'random_classes_measure.json', '--states', 1, 3)
    assert data == {'states': [1, 3], 'possible': True}


def test_family_and_estimate(capsys, tmp_path):
    data = report(capsys, 'family-fxy', '--n', 3)
    assert len(data['members']) == 6
    functions = tmp_path / 'fxy.json'
    functions.write_text(json.dumps(data))
    data = report(capsys, 'estimate', '--functions', functions, '--samples', 20, '--seed', 5)
    assert data['seed'] == 5
    assert data['samples'] == 20


def test_explore(capsys, fixtures, tmp_path):
    matrix = tmp_path / 'p2.json'
    matrix.write_text(json.dumps({'rows': [['1/2', '1/2'], ['1/2', '1/2']]}))
    data = report(capsys, 'explore-k', '--matrix', matrix)
    assert data['K'] == [1, 2]
    assert data['coverage'] == 'exhaustive'


def test_text_format(capsys, fixtures):
    code, out, _ = run(capsys, 'coalesce', '--measure', fixtures / 'random_classes_measure.json',
                       '--format', 'text')
    assert code == 0
    assert 'k: 2' in out


def test_output_file(capsys, fixtures, tmp_path):
    target = tmp_path / 'report.json'
    code, out, _ = run(capsys, 'period', '--matrix', fixtures / 'uniform_4.json', '-o', target)
    assert code == 0
    assert out == ''
    assert json.loads(target.read_text())['period'] == 1


def test_numeric_policy_from_environment(capsys, fixtures, monkeypatch):
    monkeypatch.setenv('COALESCE_NUMERIC_POLICY', 'state_budget=3')
    code, _, err = run(capsys, 'coalesce', '--measure', fixtures / 'random_classes_measure.json')
    assert code == 1
    assert err.startswith('StateBudgetExceeded:')

    monkeypatch.setenv('COALESCE_NUMERIC_POLICY', 'no_such_key=1')
    code, _, err = run(capsys, 'period', '--matrix', fixtures / 'uniform_4.json')
    assert code == 1
    assert err.startswith('ConfigurationError:')


def test_config_file(capsys, fixtures, tmp_path):
    config_file = tmp_path / 'coalesce.cfg'
    config_file.write_text('[budgets]\nstate_budget = 3\n')
    code, _, err = run(capsys, 'coalesce', '--measure', fixtures / 'random_classes_measure.json',
                       '--config', config_file)
    assert code == 1
    assert err.startswith('StateBudgetExceeded:')
