import json
import os

import pytest

from steerpy import steerpy
from steerpy.experiments import sweeps
from steerpy.experiments.scenario import Scenario
from steerpy.purify import bbpssw
from steerpy.writer import report

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'configs')


def run(capsys, *argv):
	code = steerpy.Main(list(argv))
	return code, capsys.readouterr().out


def test_keyrate_ideal(capsys):
	code, out = run(capsys, 'keyrate', '--noise', 'dephasing', '--param', '0.0', '--eta', '1.0', '--theta', '0.7854')
	assert code == 0
	rep = json.loads(out)
	assert rep['key_rate'] == pytest.approx(1.0, abs=1e-6)
	assert rep['secure'] is True
	assert rep['binning'] == 'assign_zero'


def test_keyrate_csv(capsys):
	code, out = run(capsys, 'keyrate', '--eta', '0.9', '--format', 'csv')
	assert code == 0
	meta = report.ParseKeyValueCsv(out)
	assert meta['key_rate'] == pytest.approx(0.41135, abs=1e-4)
	assert meta['secure'] is True


def test_keyrate_from_config(capsys):
	path = os.path.join(CONFIG_DIR, 'config_dephasing_30km.yaml')
	code, out = run(capsys, 'keyrate', '--config', path)
	assert code == 0
	rep = json.loads(out)
	assert rep['s2'] == pytest.approx(0.7362, abs=1e-3)
	assert rep['key_rate'] > 0
	code, out = run(capsys, 'keyrate', '--config', path, '--eta', '0.5')
	assert json.loads(out)['key_rate'] < 0


def test_composed_noise(capsys):
	code, out = run(capsys, 'keyrate', '--noise', 'amplitude_damping', '--param', '0.1', '--noise', 'dephasing',
					'--param', '0.05')
	assert code == 0
	assert 0 < json.loads(out)['key_rate'] < 1


def test_threshold_steering_only(capsys):
	code, out = run(capsys, 'threshold', 'noise', '--noise', 'depolarizing', '--eta', '1.0', '--steering-only')
	assert code == 0
	res = json.loads(out)
	assert res['steering_root'] == pytest.approx(0.2929, abs=1e-3)
	assert 'key_rate_root' not in res


def test_threshold_noise(capsys):
	code, out = run(capsys, 'threshold', 'noise', '--noise', 'amplitude_damping')
	assert code == 0
	res = json.loads(out)
	assert res['steering_root'] == pytest.approx(0.3758, abs=1e-3)
	assert res['key_rate_root'] < res['steering_root']


def test_threshold_eta(capsys):
	code, out = run(capsys, 'threshold', 'eta')
	assert code == 0
	assert json.loads(out)['eta_min'] == pytest.approx(0.7964, abs=5e-3)


def test_threshold_eta_with_dephasing_reference(capsys):
	code, out = run(capsys, 'threshold', 'eta', '--noise', 'dephasing', '--param', '0.05')
	res = json.loads(out)
	assert code == 0
	assert res['eta_min'] > 0.7964
	assert res['reference_eta'] > 0.7964


def test_never_secure_reports_error(capsys):
	code, out = run(capsys, 'threshold', 'eta', '--noise', 'depolarizing', '--param', '0.3')
	assert code == 1
	assert json.loads(out)['error'] == 'NeverSecure'


def test_esd(capsys):
	code, out = run(capsys, 'esd', 'depolarizing')
	assert code == 0
	assert json.loads(out)['esd'] == pytest.approx(2 / 3, abs=1e-3)


def test_purify_csv(capsys):
	code, out = run(capsys, 'purify', '--noise', 'amplitude_damping', '--length-km', '30', '--lc-km', '24',
					'--rounds', '6', '--eta', '0.9')
	assert code == 0
	assert out.splitlines()[0] == ','.join(sweeps.TRACE_COLUMNS)
	rows = report.ParseCsv(out)
	assert [r['round'] for r in rows] == list(range(7))
	assert rows[0]['fidelity'] == pytest.approx(0.5893, abs=1e-3)
	fidelities = [r['fidelity'] for r in rows]
	assert all(b > a for a, b in zip(fidelities, fidelities[1:]))


def test_purify_json(capsys):
	code, out = run(capsys, 'purify', '--noise', 'dephasing', '--length-km', '40', '--rounds', '8', '--format', 'json')
	assert code == 0
	res = json.loads(out)
	assert len(res['rounds']) == 9
	assert 1 <= res['best_round'] <= 6
	assert res['diverged'] is False


def test_sweep_is_deterministic(capsys):
	args = ('sweep', 'noise', '--noise', 'dephasing', '--points', '11')
	code, first = run(capsys, *args)
	assert code == 0
	_, second = run(capsys, *args)
	assert first == second
	assert first.splitlines()[0] == ','.join(sweeps.SWEEP_COLUMNS)
	assert len(first.splitlines()) == 12


def test_sweep_theta_json(capsys):
	code, out = run(capsys, 'sweep', 'theta', '--points', '21', '--format', 'json')
	assert code == 0
	res = json.loads(out)
	assert res['optimum']['theta'] == pytest.approx(0.7854, abs=1e-3)
	assert len(res['rows']) == 21


def test_sweep_eta(capsys):
	code, out = run(capsys, 'sweep', 'eta', '--points', '7', '--eta-min', '0.7', '--eta-max', '1.0')
	assert code == 0
	rows = report.ParseCsv(out)
	assert [r['eta_b'] for r in rows][0] == pytest.approx(0.7)
	assert rows[0]['secure'] is False
	assert rows[-1]['secure'] is True


def test_contour(capsys):
	code, out = run(capsys, 'contour', '--noise', 'dephasing', '--l-max', '20', '--l-step', '10', '--max-rounds', '2')
	assert code == 0
	rows = report.ParseCsv(out)
	assert len(rows) == 9
	assert {(r['l_km'], r['round']) for r in rows} == {(l, n) for l in (0.0, 10.0, 20.0) for n in range(3)}


def test_threshold_table(capsys):
	code, out = run(capsys, 'table')
	assert code == 0
	res = json.loads(out)
	assert [r['noise_kind'] for r in res['rows']] == ['dephasing', 'depolarizing', 'amplitude_damping']


def test_strategy_table_csv(capsys):
	code, out = run(capsys, 'table', 'strategy', '--noise', 'dephasing', '--max-rounds', '8', '--format', 'csv')
	assert code == 0
	rows = report.ParseCsv(out)
	assert [r['regime'] for r in rows] == ['short', 'medium', 'long']


def test_output_file(capsys, tmp_path):
	out_path = tmp_path / 'results' / 'keyrate.json'
	code, out = run(capsys, 'keyrate', '--out', str(out_path))
	assert code == 0
	assert out == ''
	assert json.loads(out_path.read_text())["key_rate"] == 1.0


def test_validate(capsys):
	code, out = run(capsys, 'validate')
	assert code == 0
	assert json.loads(out)['passed'] is True


def test_unknown_flag(capsys):
	assert steerpy.Main(['keyrate', '--colour', 'blue']) == 2


def test_unknown_config_key(capsys, tmp_path):
	path = tmp_path / 'bad.yaml'
	path.write_text('theta: 0.5\ncolour: blue\n')
	code, out = run(capsys, 'keyrate', '--config', str(path))
	assert code == 2
	assert out == ''


def test_invalid_parameter(capsys):
	code, _ = run(capsys, 'keyrate', '--noise', 'dephasing', '--param', '0.7')
	assert code == 2
	code, _ = run(capsys, 'keyrate', '--noise', 'dephasing', '--param', '0.1', '--param', '0.2')
	assert code == 2


def test_missing_noise_for_contour(capsys):
	code, _ = run(capsys, 'contour', '--l-max', '10')
	assert code == 2


@pytest.mark.parametrize("text", [
	'theta: [0.5\n',
	'5\n',
	'- theta\n- 0.5\n',
	'theta: abc\n',
	'rounds: 2.5\n',
	'noise: 5\n',
	'noise: [dephasing]\n',
	'noise:\n  - {kind: dephasing, param: strong}\n',
])
def test_malformed_config(capsys, tmp_path, text):
	path = tmp_path / 'bad.yaml'
	path.write_text(text)
	code, out = run(capsys, 'keyrate', '--config', str(path))
	assert code == 2
	assert out == ''


@pytest.mark.parametrize("argv", [
	('keyrate', '--param', '0.3'),
	('keyrate', '--length-km', '30'),
	('keyrate', '--lc-km', '30'),
	('keyrate', '--noise', 'dephasing', '--param', '0.1', '--lc-km', '30'),
	('keyrate', '--noise', 'dephasing', '--param', '0.1', '--length-km', '30'),
	('threshold', 'noise', '--noise', 'dephasing', '--param', '0.1'),
	('sweep', 'noise', '--noise', 'dephasing', '--length-km', '30'),
	('contour', '--noise', 'dephasing', '--length-km', '30'),
	('esd', 'dephasing', '--param', '0.1'),
])
def test_unused_noise_flags_are_rejected(capsys, argv):
	code, out = run(capsys, *argv)
	assert code == 2
	assert out == ''


def test_length_overrides_config_noise(capsys):
	path = os.path.join(CONFIG_DIR, 'config_dephasing_30km.yaml')
	code, out = run(capsys, 'keyrate', '--config', path, '--length-km', '60')
	assert code == 0
	rep = json.loads(out)
	assert rep['s2'] == pytest.approx(0.6116, abs=1e-3)
	assert rep['secure'] is False
	code, out = run(capsys, 'keyrate', '--config', path, '--lc-km', '80')
	assert code == 0
	assert json.loads(out)['s2'] == pytest.approx(0.8437, abs=1e-3)


def test_params_override_config_noise(capsys):
	path = os.path.join(CONFIG_DIR, 'config_combined.yaml')
	code, out = run(capsys, 'keyrate', '--config', path, '--param', '0.0', '--param', '0.0')
	assert code == 0
	assert json.loads(out)['s2'] == pytest.approx(0.95, abs=1e-9)
	code, _ = run(capsys, 'keyrate', '--config', path, '--param', '0.0')
	assert code == 2


def test_purify_json_round_trip(capsys):
	code, out = run(capsys, 'purify', '--noise', 'dephasing', '--length-km', '40', '--rounds', '5', '--format', 'json')
	assert code == 0
	obj = json.loads(out)
	best = obj.pop('best_round')
	trace = bbpssw.PurificationTrace.from_dict(obj)
	assert trace.to_dict() == obj
	assert bbpssw.effective_rate_curve(trace)[0] == best
	scenario = Scenario.from_dict({'noise': [{'kind': 'dephasing', 'length_km': 40.0}]})
	assert trace == bbpssw.purify_iterate(scenario.state(), 5, security=scenario.security)


def test_contour_json_round_trip(capsys):
	code, out = run(capsys, 'contour', '--noise', 'depolarizing', '--l-max', '40', '--l-step', '20',
					'--max-rounds', '3', '--format', 'json')
	assert code == 0
	obj = json.loads(out)
	counts = obj.pop('secure_cells_per_round')
	res = sweeps.SweepResult.from_dict(obj)
	assert res.to_dict() == obj
	assert {str(k): v for k, v in sweeps.secure_cells_per_round(res).items()} == counts
