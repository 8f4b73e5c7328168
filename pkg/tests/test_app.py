import csv
import json

import pytest

from ckks_ident.app import EXIT_CONFIG, EXIT_CORRECTNESS, EXIT_FAIL, EXIT_OK, build_parser, lemma1_rows, main
from ckks_ident.config import EXPERIMENT_PRESETS


def _read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == '# schema_version=1'
    return list(csv.DictReader(lines[1:]))


@pytest.fixture
def tiny_config(tmp_path):
    data = json.loads(json.dumps(EXPERIMENT_PRESETS['tiny']))
    data['ident']['k_max'] = 4
    data['output'] = {'dir': str(tmp_path / 'out')}
    path = tmp_path / 'tiny.json'
    path.write_text(json.dumps(data))
    return path


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_validate_reports_truncation_failure(tmp_path):
    out = tmp_path / 'report.json'
    assert main(['validate', '--preset', 'reference', '--out', str(out)]) == EXIT_FAIL
    report = json.loads(out.read_text())
    status = {v['name']: v['status'] for v in report['verdicts']}
    assert status['truncation'] == 'FAIL'
    assert status['ring_capacity'] == 'PASS'
    assert status['decryption_envelope'] == 'PASS'


def test_validate_with_excitation(tmp_path):
    out = tmp_path / 'report.json'
    main(['validate', '--preset', 'tiny', '--excitation-steps', '300', '--out', str(out)])
    report = json.loads(out.read_text())
    assert report['delta_hat'] > 0


def test_unknown_preset():
    assert main(['validate', '--preset', 'nope']) == EXIT_CONFIG


def test_bad_config_file(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{"model": {}, "crypto": {}, "ident": {}, "extra": 1}')
    assert main(['identify', '--config', str(path)]) == EXIT_CONFIG


def test_simulate(tmp_path):
    out = tmp_path / 'plant.csv'
    assert main(['simulate', '--preset', 'tiny', '--steps', '20', '--out', str(out)]) == EXIT_OK
    rows = _read_csv(out)
    assert len(rows) == 20
    assert all(1 <= float(r['u_k']) <= 5 for r in rows)


def test_identify_plaintext(tmp_path):
    out = tmp_path / 'run.csv'
    code = main(['identify', '--preset', 'tiny', '--mode', 'plaintext', '--k-max', '30',
                 '--desk-alpha', '--out', str(out), '--plot', str(tmp_path / 'run.png')])
    assert code == EXIT_OK
    rows = _read_csv(out)
    assert len(rows) == 30
    assert 'noise_inf' not in rows[0]
    summary = json.loads(out.with_suffix('.json').read_text())
    assert summary['seeds'] == {'plant': 2024, 'crypto': 7, 'quantizer': 11}
    assert out.with_suffix('.dat').exists()
    assert (tmp_path / 'run.png').exists()


def test_identify_dual_from_config(tiny_config, tmp_path):
    assert main(['identify', '--config', str(tiny_config), '--seed-plant', '5']) == EXIT_OK
    out = tmp_path / 'out' / 'tiny_dual.csv'
    rows = _read_csv(out)
    assert len(rows) == 4
    assert all(float(r['noise_inf']) < 1e-3 for r in rows)
    assert json.loads(out.with_suffix('.json').read_text())['seeds']['plant'] == 5


def test_keygen_then_identify(tmp_path):
    params = tmp_path / 'params.json'
    params.write_text(json.dumps(EXPERIMENT_PRESETS['tiny']['crypto']))
    keys = tmp_path / 'keys'
    assert main(['keygen', '--params', str(params), '--seed', '3', '--out', str(keys)]) == EXIT_OK
    assert (keys / 'secret.key').exists()
    code = main(['identify', '--preset', 'tiny', '--mode', 'encrypted', '--k-max', '2',
                 '--keys', str(keys), '--out', str(tmp_path / 'enc.csv')])
    assert code == EXIT_OK


def test_keys_for_other_ring(tmp_path):
    crypto = dict(EXPERIMENT_PRESETS['tiny']['crypto'], N=32)
    params = tmp_path / 'params.json'
    params.write_text(json.dumps(crypto))
    main(['keygen', '--params', str(params), '--seed', '3', '--out', str(tmp_path / 'keys')])
    code = main(['identify', '--preset', 'tiny', '--k-max', '1', '--keys', str(tmp_path / 'keys'),
                 '--out', str(tmp_path / 'x.csv')])
    assert code == EXIT_CONFIG


def test_wraparound_exit_code(tmp_path):
    data = json.loads(json.dumps(EXPERIMENT_PRESETS['tiny']))
    data['crypto']['P_factors'] = [{'prime_bits': 40, 'power': 3}]
    data['ident']['k_max'] = 20
    path = tmp_path / 'small.json'
    path.write_text(json.dumps(data))
    assert main(['identify', '--config', str(path), '--out', str(tmp_path / 'x.csv')]) == EXIT_CORRECTNESS


def test_verify_lemma1(tmp_path):
    out = tmp_path / 'lemma.csv'
    assert main(['verify-lemma1', '--sigma', '3.2', '--gamma', '7.73', '20', '--out', str(out)]) == EXIT_OK
    rows = _read_csv(out)
    checks = {(r['check'], r['gamma']) for r in rows}
    assert ('convolved_distance', '7.73') in checks
    assert all(r['verdict'] in ('PASS', 'N/A') for r in rows)


def test_lemma1_rows_higher_dims():
    rows = lemma1_rows(3.2, [10.0, 30.0], 3, None)
    assert {r['check'] for r in rows} == {'tail_vs_banaszczyk', 'tail_vs_exp_minus_n'}
    assert all(r['verdict'] != 'FAIL' for r in rows)


def test_lemma1_below_truncation_is_not_applicable():
    rows = lemma1_rows(3.2, [2.0], 1, 0.5)
    by_check = {r['check']: r for r in rows}
    assert by_check['tail_vs_exp_minus_n']['verdict'] == 'N/A'
    assert by_check['convolved_distance']['verdict'] == 'N/A'
    assert by_check['tail_vs_banaszczyk']['verdict'] == 'PASS'


@pytest.mark.slow
def test_bench(tmp_path):
    out = tmp_path / 'bench.csv'
    assert main(['bench', '--dims', '64', '128', '--reps', '1', '--out', str(out)]) == EXIT_OK
    assert len(_read_csv(out)) == 10
