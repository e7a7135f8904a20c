import json
import math
import os

import numpy as np
import pytest

from steerpy.errors import InvalidParameter
from steerpy.experiments import sweeps, tables
from steerpy.experiments.scenario import NoiseStage, Scenario, load_scenario
from steerpy.protocol import keyrate
from steerpy.quantum import channels, states
from steerpy.writer import report

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'configs')


def config(name):
	return os.path.join(CONFIG_DIR, name)


def crossings_of(result, quantity):
	return [c for c in result.crossings if c.quantity == quantity]


# Scenarios


def test_default_config_is_ideal():
	sc = load_scenario(config('config.yaml'))
	assert sc.noise_kind == 'identity'
	assert sc.security.evaluate(sc.state()).key_rate == pytest.approx(1.0, abs=1e-12)


def test_dephasing_config():
	sc = load_scenario(config('config_dephasing_30km.yaml'))
	assert sc.noise_kind == 'dephasing'
	assert sc.noise_param == pytest.approx(0.2638, abs=1e-4)
	assert states.fidelity_phi_plus(sc.state()) == pytest.approx(0.7362, abs=1e-4)
	assert sc.rounds == 8
	assert sc.label == 'dephasing_30km'


def test_combined_config():
	sc = load_scenario(config('config_combined.yaml'))
	assert sc.noise_kind == 'composite'
	assert math.isnan(sc.noise_param)
	assert [st.kind for st in sc.channel().stages] == [channels.NoiseKind.AMPLITUDE_DAMPING,
														channels.NoiseKind.DEPHASING]
	assert sc.eta_b == 0.95


def test_yaml_and_json_agree(tmp_path):
	d = {'theta': 0.6, 'eta_b': 0.9, 'noise': [{'kind': 'depolarizing', 'param': 0.1}], 'side': 'stationary'}
	yml = tmp_path / 'scenario.yaml'
	yml.write_text('theta: 0.6\neta_b: 0.9\nside: stationary\nnoise:\n  - {kind: depolarizing, param: 0.1}\n')
	js = tmp_path / 'scenario.json'
	js.write_text(json.dumps(d))
	assert load_scenario(str(yml)) == load_scenario(str(js))
	assert load_scenario(str(js)).side == 'stationary'


def test_empty_config_uses_defaults(tmp_path):
	path = tmp_path / 'empty.yaml'
	path.write_text('')
	assert load_scenario(str(path)) == Scenario()


def test_unknown_scenario_key(tmp_path):
	path = tmp_path / 'bad.yaml'
	path.write_text('theta: 0.5\ncolour: blue\n')
	with pytest.raises(ValueError, match='Unrecognized keys'):
		load_scenario(str(path))


def test_unknown_noise_stage_key():
	with pytest.raises(ValueError, match='Unrecognized keys'):
		Scenario.from_dict({'noise': [{'kind': 'dephasing', 'strength': 0.1}]})


def test_invalid_scenarios():
	with pytest.raises(InvalidParameter):
		NoiseStage('dephasing', param=0.1, length_km=10)
	with pytest.raises(InvalidParameter):
		Scenario(rounds=13)
	with pytest.raises(InvalidParameter):
		Scenario(theta=2.0)
	with pytest.raises(InvalidParameter):
		Scenario.from_dict({'noise': {'kind': 'dephasing', 'param': 0.7}})
	with pytest.raises(ValueError):
		Scenario(side='sideways')


@pytest.mark.parametrize("text", [
	'7\n',
	'- 1\n- 2\n',
	'theta: abc\n',
	'eta_b: true\n',
	'rounds: 2.5\n',
	'twirl_each_round: maybe\n',
	'noise: [dephasing]\n',
])
def test_malformed_scenario_files(tmp_path, text):
	path = tmp_path / 'bad.yaml'
	path.write_text(text)
	with pytest.raises(InvalidParameter):
		load_scenario(str(path))


def test_numeric_fields_are_coerced():
	sc = Scenario.from_dict({'theta': '0.5', 'rounds': 3.0, 'noise': [{'kind': 'dephasing', 'param': '0.1'}]})
	assert sc.theta == 0.5
	assert sc.rounds == 3 and isinstance(sc.rounds, int)
	assert sc.noise[0].param == 0.1


def test_scenario_replace_and_round_trip():
	sc = Scenario.from_dict({'noise': {'kind': 'amplitude_damping', 'length_km': 30}})
	assert sc.noise_param == pytest.approx(0.7135, abs=1e-4)
	assert Scenario.from_dict(sc.to_dict()) == sc
	other = sc.replace(eta_b=0.8)
	assert other.eta_b == 0.8
	assert other.noise == sc.noise


# Sweeps


def test_parameter_grid():
	np.testing.assert_allclose(sweeps.parameter_grid(0, 0.5, 0.01)[-1], 0.5)
	assert len(sweeps.parameter_grid(0, 0.5, 0.01)) == 51
	assert list(sweeps.parameter_grid(0, 60, 5)) == [float(x) for x in range(0, 65, 5)]


def test_zero_crossings():
	xs = [0.0, 1.0, 2.0, 3.0]
	ys = [1.0, 0.5, -0.5, 1.0]
	down, up = sweeps.zero_crossings(xs, ys)
	assert down.direction == 'down'
	assert down.interpolated == pytest.approx(1.5)
	assert up.direction == 'up'
	assert up.interpolated == pytest.approx(2 + 1 / 3)
	assert sweeps.zero_crossings(xs, [1.0, 2.0, 3.0, 4.0]) == ()


def test_zero_crossings_refined():
	(c,) = sweeps.zero_crossings([0.0, 1.0], [1.0, -1.0], refine=lambda x: 0.3 - x, tol=1e-8)
	assert c.interpolated == pytest.approx(0.5)
	assert c.refined == pytest.approx(0.3, abs=1e-7)


def test_noise_sweep_starts_at_ideal_rate(phi_plus):
	result = sweeps.sweep_noise('dephasing', n_points=11)
	first = result.rows[0]
	assert first['param'] == 0.0
	assert first['key_rate'] == pytest.approx(keyrate.key_rate(phi_plus, keyrate.MeasurementModel(1.0)).key_rate,
											  abs=1e-12)
	assert result.columns == sweeps.SWEEP_COLUMNS


def test_dephasing_noise_sweep_crossings():
	result = sweeps.sweep_noise('dephasing')
	assert len(result.rows) == 51
	(key,) = crossings_of(result, 'key_rate')
	(steer,) = crossings_of(result, 's2')
	(conc,) = crossings_of(result, 'concurrence')
	assert key.refined == pytest.approx(1 - 1 / np.sqrt(2), abs=1e-3)
	assert steer.refined == pytest.approx(key.refined, abs=2e-4)
	assert conc.refined == pytest.approx(0.5, abs=1e-3)


def test_depolarizing_noise_sweep():
	result = sweeps.sweep_noise('depolarizing')
	for row in result.rows:
		assert row['concurrence'] == pytest.approx(max(0.0, 1 - 1.5 * row['param']), abs=1e-9)
	(key,) = crossings_of(result, 'key_rate')
	(conc,) = crossings_of(result, 'concurrence')
	assert 0.12 < key.refined < 0.16
	assert conc.refined == pytest.approx(2 / 3, abs=1e-3)


def test_efficiency_sweep_has_threshold():
	sc = Scenario(noise=[{'kind': 'dephasing', 'param': 0.2}])
	result = sweeps.sweep_efficiency(sc, n_points=61)
	assert result.rows[-1]['key_rate'] == pytest.approx(0.2127, abs=1e-3)
	(c,) = result.crossings
	assert c.direction == 'up'
	assert 0.4 < c.refined < 1.0
	assert all(row['secure'] == (row['eta_b'] > c.refined) for row in result.rows
			   if abs(row['eta_b'] - c.refined) > 1e-3)


@pytest.mark.parametrize("kind,param", [("depolarizing", 0.3), ("dephasing", 0.3)])
def test_efficiency_sweep_never_secure(kind, param):
	sc = Scenario(noise=[{'kind': kind, 'param': param}])
	result = sweeps.sweep_efficiency(sc, n_points=25)
	assert not any(result.column('secure'))
	assert result.crossings == ()


def test_theta_sweep_is_symmetric_without_noise():
	result = sweeps.sweep_theta(n_points=41)
	ys = result.column('key_rate')
	np.testing.assert_allclose(ys, ys[::-1], atol=1e-9)
	assert result.optimum['theta'] == pytest.approx(np.pi / 4, abs=1e-3)
	assert result.optimum['key_rate'] == pytest.approx(1.0, abs=1e-4)


def test_theta_sweep_crossings_at_theta_min():
	result = sweeps.sweep_theta(n_points=41)
	up, down = crossings_of(result, 'key_rate')
	tm = keyrate.theta_min()
	assert up.direction == 'up'
	assert up.refined == pytest.approx(tm, abs=1e-3)
	assert down.refined == pytest.approx(np.pi / 2 - tm, abs=1e-3)


def test_theta_sweep_asymmetric_under_damping():
	base = Scenario(noise=[{'kind': 'amplitude_damping', 'param': 0.3}])
	ys = np.array(sweeps.sweep_theta(n_points=41, base=base).column('key_rate'))
	assert np.max(np.abs(ys - ys[::-1])) > 1e-3


def test_distance_sweep_decreases():
	result = sweeps.distance_sweep('depolarizing', l_step=10)
	rates = [max(r, 0.0) for r in result.column('key_rate')]
	assert rates[0] == pytest.approx(1.0, abs=1e-12)
	assert all(b <= a for a, b in zip(rates, rates[1:]))


# Purification contours


@pytest.fixture(scope='module')
def dephasing_contour():
	return sweeps.contour_grid('dephasing', l_step=5, rounds_range=(0, 10))


@pytest.fixture(scope='module')
def depolarizing_contour():
	return sweeps.contour_grid('depolarizing', l_step=5, rounds_range=(0, 10))


def test_contour_is_complete(dephasing_contour):
	lengths, rounds = dephasing_contour.grid
	assert len(lengths) == 13
	assert len(dephasing_contour.rows) == 13 * 11
	cells = {(r['l_km'], r['round']) for r in dephasing_contour.rows}
	assert cells == {(float(l), int(n)) for l in lengths for n in rounds}
	assert dephasing_contour.columns == sweeps.CONTOUR_COLUMNS


def test_contour_round_zero_matches_distance_sweep(dephasing_contour):
	plain = sweeps.distance_sweep('dephasing', l_step=5).column('key_rate')
	raw = [r['key_rate'] for r in dephasing_contour.rows if r['round'] == 0]
	np.testing.assert_allclose(raw, plain, atol=1e-12)


def test_dephasing_never_diverges_and_saturates(dephasing_contour):
	assert not any(dephasing_contour.column('diverged'))
	counts = sweeps.secure_cells_per_round(dephasing_contour)
	assert counts[9] == counts[10] == 13


def test_dephasing_beats_depolarizing(dephasing_contour, depolarizing_contour):
	assert sum(sweeps.secure_cells_per_round(dephasing_contour).values()) > \
		sum(sweeps.secure_cells_per_round(depolarizing_contour).values())


def test_depolarizing_diverges_at_long_range(depolarizing_contour):
	for row in depolarizing_contour.rows:
		assert row['diverged'] == (row['l_km'] >= 45)
	for l_km in (45.0, 60.0):
		rates = {r['key_rate'] for r in depolarizing_contour.rows if r['l_km'] == l_km}
		assert len(rates) == 1


def test_zero_contour(depolarizing_contour):
	contour = sweeps.zero_contour(depolarizing_contour)
	assert set(contour) == set(range(11))
	assert contour[0] is not None and contour[0] < 10


def test_contour_with_worker_pool():
	serial = sweeps.contour_grid('amplitude_damping', l_step=20, rounds_range=(0, 2))
	pooled = sweeps.contour_grid('amplitude_damping', l_step=20, rounds_range=(0, 2), workers=2)
	assert pooled.rows == serial.rows


# Tables


def test_threshold_table():
	table = tables.threshold_table()
	assert [r.noise_kind for r in table.rows] == [k.value for k in channels.NOISE_KINDS]
	depol = table.row('depolarizing')
	assert depol.steering_root == pytest.approx(0.2929, abs=1e-3)
	assert depol.esd == pytest.approx(2 / 3, abs=1e-3)
	assert depol.residual_concurrence > 0.7
	assert depol.reference_param == pytest.approx(0.5276, abs=1e-3)
	assert depol.reference_fidelity == pytest.approx(0.6043, abs=1e-3)
	assert table.row('amplitude_damping').steering_root == pytest.approx(0.3758, abs=1e-3)
	assert table.row('dephasing').reference_fidelity == pytest.approx(0.7362, abs=1e-3)
	assert table.to_dict()['reference_km'] == 30.0


def test_threshold_table_when_never_secure():
	table = tables.threshold_table(eta_b=0.5)
	for row in table.rows:
		assert math.isnan(row.key_rate_root)
		assert not math.isnan(row.esd)


@pytest.mark.parametrize("l_km,expected", [(14.9, 'short'), (15, 'medium'), (35, 'medium'), (35.1, 'long')])
def test_regime(l_km, expected):
	assert tables.regime(l_km) == expected


def test_strategy_table():
	short, medium, long_ = tables.strategy_table('dephasing')
	assert (short.regime, medium.regime, long_.regime) == ('short', 'medium', 'long')
	assert short.best_round == 0
	assert long_.best_round >= 1
	assert long_.secure
	assert long_.effective_rate < short.effective_rate


# Output


def test_csv_is_deterministic_and_parses_back():
	result = sweeps.sweep_noise('amplitude_damping', n_points=9)
	text = report.FormatCsv(result.rows, result.columns)
	assert text == report.FormatCsv(sweeps.sweep_noise('amplitude_damping', n_points=9).rows, result.columns)
	assert text.splitlines()[0] == ','.join(sweeps.SWEEP_COLUMNS)
	assert report.ParseCsv(text) == [dict(r) for r in result.rows]


def test_key_value_csv_and_json(tmp_path):
	meta = {'key_rate': 0.41135, 'secure': True, 'label': 'x'}
	assert report.ParseKeyValueCsv(report.FormatKeyValueCsv(meta)) == meta
	out = tmp_path / 'nested' / 'out.json'
	report.WriteJson({'value': np.float64(0.5), 'missing': float('nan'), 'kind': channels.NoiseKind.DEPHASING},
					 str(out))
	assert json.loads(out.read_text()) == {'value': 0.5, 'missing': None, 'kind': 'dephasing'}


def test_sweep_result_survives_json():
	result = sweeps.sweep_theta(n_points=21)
	back = sweeps.SweepResult.from_dict(json.loads(report.FormatJson(result.to_dict())))
	assert back.to_dict() == result.to_dict()
	assert back.crossings == result.crossings
	assert back.optimum == result.optimum
