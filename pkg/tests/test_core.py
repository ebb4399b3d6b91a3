import pandas as pd
import pytest

from symuniv import SymPowerExperiment
from symuniv.errors import OutOfRegionError, UnsupportedKindError, UnsupportedWeightError


def test_rejects_unknown_kind_and_weight():
    with pytest.raises(UnsupportedKindError):
        SymPowerExperiment(kind='sym7')
    with pytest.raises(UnsupportedWeightError):
        SymPowerExperiment(weight=14)


def test_default_config():
    experiment = SymPowerExperiment(kind='sym2')
    assert experiment.config['p_max'] == 100_000
    assert experiment.config['n_boundary'] == 128
    assert SymPowerExperiment(kind='rs1').config['p_max'] == 10_000


def test_config_override():
    experiment = SymPowerExperiment(kind='sym1', config={'eps': 0.1, 'disc_radius': 0.02})
    assert experiment.config['eps'] == 0.1
    assert experiment.disc.radius == 0.02
    assert experiment.config['dt'] == 0.05


def test_bad_disc_override():
    experiment = SymPowerExperiment(kind='sym2', config={'disc_center': 0.6})
    with pytest.raises(OutOfRegionError):
        experiment.disc


def test_form_is_built_once():
    experiment = SymPowerExperiment(kind='sym1', n_coeffs=500)
    assert experiment.form is experiment.form
    assert experiment.form.c(2) == -24
    assert experiment.coefficients(100).N == 100


def test_process_points_keeps_order(tmp_path):
    experiment = SymPowerExperiment(kind='sym1', n_coeffs=2000, n_jobs=2)
    points = [complex(2.0, t) for t in (3.0, 0.0, 1.5, 2.5)]
    out = tmp_path / 'values.csv'
    df = experiment.process_points(points, output_csv=str(out))
    assert df['im_s'].tolist() == [3.0, 0.0, 1.5, 2.5]
    assert list(df.columns) == ['re_s', 'im_s', 're_L', 'im_L', 'stability']
    saved = pd.read_csv(out)
    assert saved['re_L'].tolist() == pytest.approx(df['re_L'].tolist(), rel=1e-15)

    single = SymPowerExperiment(kind='sym1', n_coeffs=2000).process_points(points)
    assert single['re_L'].tolist() == pytest.approx(df['re_L'].tolist(), abs=1e-12)


def test_value_dict():
    experiment = SymPowerExperiment(kind='sym1', n_coeffs=2000)
    result = experiment.value(complex(2.0, 1.0))
    assert result['mode'] == 'smoothed'
    assert result['X'] == 50.0
    assert not result['flagged']


def test_package_getters():
    import symuniv
    assert symuniv.get_supported_kinds() == list(symuniv.KIND_CONFIGS)
    assert symuniv.get_supported_weights() == [12, 16, 18, 20, 22, 26]
    assert symuniv.get_default_config('rs2')['p_max'] == 10_000
    with pytest.raises(ValueError):
        symuniv.get_default_config('ad2')
