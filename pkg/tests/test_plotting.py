import numpy as np

from ckks_ident.plotting import render_error_plot


def test_png_bytes():
    result = render_error_plot({'plaintext': np.linspace(5, 1, 500)})
    assert result['success']
    assert result['png'].startswith(b'\x89PNG')


def test_writes_file(tmp_path):
    path = tmp_path / 'err.png'
    result = render_error_plot({'dual': [5.0, 4.0, 3.0], 'shadow': [5.0, 4.1, 2.9]}, str(path))
    assert result == {'success': True, 'path': str(path)}
    assert path.read_bytes().startswith(b'\x89PNG')


def test_nan_values_are_drawn(tmp_path):
    assert render_error_plot({'x': [1.0, float('nan'), 0.5]})['success']


def test_empty_series():
    result = render_error_plot({'x': []})
    assert not result['success']
    assert 'error' in result


def test_unwritable_path(tmp_path):
    result = render_error_plot({'x': [1.0, 2.0]}, str(tmp_path / 'missing' / 'err.png'))
    assert not result['success']
