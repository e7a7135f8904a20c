"""
Invariant suite behind `steerpy validate`.

Each check returns (passed, detail). RunValidation collects them in a fixed
order; any failure makes the CLI exit nonzero.
"""

import logging

import numpy as np

from steerpy.protocol import keyrate
from steerpy.purify import bbpssw
from steerpy.quantum import channels, qmat, states

logger = logging.getLogger(__name__)

SEED = 20240613
GAMMAS = np.linspace(0.0, 0.99, 34)


def _test_states():
	out = [states.bell_state(label) for label in states.BELL_LABELS]
	out += [states.psi_theta(t) for t in np.linspace(0, np.pi / 2, 7)]
	out.append(states.maximally_mixed())
	for kind in channels.NOISE_KINDS:
		for param in np.linspace(*channels.PARAM_RANGES[kind], 6):
			ch = channels.make_channel(kind, param)
			out.append(channels.apply_one_sided(ch, states.bell_state('phi_plus')))
	return out


def CheckCptp():
	worst = 0.0
	for kind in channels.NOISE_KINDS:
		for param in np.linspace(*channels.PARAM_RANGES[kind], 11):
			worst = max(worst, channels.completeness_error(channels.make_channel(kind, param)))
	return worst <= qmat.STRUCTURAL_TOL, 'max completeness error {:.2e}'.format(worst)


def CheckNormalisation():
	worst = 0.0
	for s in _test_states():
		for eta in (0.0, 0.5, 0.9, 1.0):
			t = keyrate.statistics(s, keyrate.MeasurementModel(eta))
			worst = max(worst, float(np.max(np.abs(t.p.sum(axis=(2, 3)) - 1))))
	return worst <= qmat.STRUCTURAL_TOL, 'max normalisation error {:.2e}'.format(worst)


def CheckNoSignalling():
	worst = 0.0
	for s in _test_states():
		t = keyrate.statistics(s, keyrate.MeasurementModel(0.8))
		for x in keyrate.SETTINGS:
			worst = max(worst, float(np.max(np.abs(t.alice_marginal(x, 1) - t.alice_marginal(x, 2)))))
	return worst <= 1e-10, 'max signalling {:.2e}'.format(worst)


def CheckNoClick():
	worst = 0.0
	for s in _test_states():
		for eta in (0.0, 0.3, 0.8, 1.0):
			t = keyrate.statistics(s, keyrate.MeasurementModel(eta))
			for x in keyrate.SETTINGS:
				for y in keyrate.SETTINGS:
					worst = max(worst, abs(t.no_click(x, y) - (1 - eta)))
	return worst <= 1e-15, 'max |p(no-click) - (1 - eta)| {:.2e}'.format(worst)


def CheckRecurrenceOracle():
	rng = np.random.default_rng(SEED)
	worst = 0.0
	for f in rng.uniform(0.0, 1.0, 50):
		out, p = bbpssw.bbpssw_exact(states.werner_state(f))
		f_next, p_next = bbpssw.bbpssw_recurrence(f)
		worst = max(worst, abs(states.fidelity_phi_plus(out) - f_next), abs(p - p_next))
	for w in rng.dirichlet(np.ones(4), 50):
		out, p = bbpssw.bbpssw_exact(states.bell_diagonal_state(w))
		w_next, p_next = bbpssw.bell_diagonal_recurrence(w)
		got = states.as_bell_diagonal(out).weights
		worst = max(worst, float(np.max(np.abs(np.subtract(got, w_next)))), abs(p - p_next))
	return worst <= 1e-10, 'max circuit/recurrence mismatch {:.2e}'.format(worst)


def CheckFixedPoints():
	f1, p1 = bbpssw.bbpssw_recurrence(1.0)
	fh, _ = bbpssw.bbpssw_recurrence(0.5)
	up = bbpssw.iterate_recurrence(0.55, 30)[-1]
	down = bbpssw.iterate_recurrence(0.45, 30)[-1]
	ok = abs(f1 - 1) < 1e-12 and abs(p1 - 1) < 1e-12 and abs(fh - 0.5) < 1e-12 and up > 0.99 and down < 0.45
	return ok, 'F=1 -> {:.6f}, F=0.5 -> {:.6f}, 0.55 -> {:.4f}, 0.45 -> {:.4f}'.format(f1, fh, up, down)


def CheckAnalyticSteering():
	worst = 0.0
	m = keyrate.MeasurementModel(1.0)
	phi = states.bell_state('phi_plus')
	for q in np.linspace(0, 1, 21):
		s = channels.apply_one_sided(channels.depolarizing(q), phi)
		worst = max(worst, abs(keyrate.steering_s2(keyrate.statistics(s, m)) - (1 - q)))
	for g in GAMMAS:
		s = channels.apply_one_sided(channels.amplitude_damping(g), phi)
		expected = 0.5 * (1 - g + np.sqrt(1 - g))
		worst = max(worst, abs(keyrate.steering_s2(keyrate.statistics(s, m)) - expected))
	for theta in np.linspace(0, np.pi / 2, 21):
		t = keyrate.statistics(states.psi_theta(theta), m)
		worst = max(worst, abs(keyrate.steering_s2(t) - 0.5 * (1 + np.sin(2 * theta))))
	return worst <= 1e-9, 'max S2 deviation {:.2e}'.format(worst)


def CheckAnalyticConcurrence():
	worst = 0.0
	phi = states.bell_state('phi_plus')
	for p in np.linspace(0, 0.5, 21):
		s = channels.apply_one_sided(channels.dephasing(p), phi)
		worst = max(worst, abs(states.concurrence(s) - abs(1 - 2 * p)))
	for q in np.linspace(0, 1, 21):
		s = channels.apply_one_sided(channels.depolarizing(q), phi)
		worst = max(worst, abs(states.concurrence(s) - max(0.0, 1 - 1.5 * q)))
	for g in GAMMAS:
		s = channels.apply_one_sided(channels.amplitude_damping(g), phi)
		worst = max(worst, abs(states.concurrence(s) - np.sqrt(1 - g)))
	return worst <= 1e-9, 'max concurrence deviation {:.2e}'.format(worst)


def CheckTwirl():
	ok = True
	worst = 0.0
	for s in _test_states():
		t = bbpssw.pauli_twirl(s)
		ok = ok and states.is_bell_diagonal(t)
		ok = ok and states.concurrence(t) <= states.concurrence(s) + 1e-9
		worst = max(worst, abs(states.fidelity_phi_plus(t) - states.fidelity_phi_plus(s)),
					float(np.max(np.abs(bbpssw.pauli_twirl(t).rho - t.rho))))
	return ok and worst <= qmat.STRUCTURAL_TOL, 'max fidelity/idempotence error {:.2e}'.format(worst)


def CheckDistanceMaps():
	ls = np.linspace(0, 200, 101)
	ok = True
	for kind in channels.NOISE_KINDS:
		vals = [channels.noise_parameter(kind, channels.DistanceModel.default_for(kind, l)) for l in ls]
		ok = ok and all(b > a for a, b in zip(vals, vals[1:]))
		ok = ok and abs(vals[-1] - channels.PARAM_RANGES[kind][1]) < 1e-2
	return ok, 'distance maps monotone with the expected limits' if ok else 'distance map check failed'


CHECKS = (
	('cptp', CheckCptp),
	('normalisation', CheckNormalisation),
	('no_signalling', CheckNoSignalling),
	('no_click', CheckNoClick),
	('recurrence_oracle', CheckRecurrenceOracle),
	('fixed_points', CheckFixedPoints),
	('analytic_steering', CheckAnalyticSteering),
	('analytic_concurrence', CheckAnalyticConcurrence),
	('twirl', CheckTwirl),
	('distance_maps', CheckDistanceMaps),
)


def RunValidation(checks=CHECKS):
	results = []
	for name, check in checks:
		try:
			passed, detail = check()
		except Exception as e:
			logging.error('Caught exception: {}'.format(e))
			passed, detail = False, '{}: {}'.format(type(e).__name__, e)
		results.append({'check': name, 'passed': bool(passed), 'detail': detail})
		logger.info('%s: %s (%s)', name, 'ok' if passed else 'FAILED', detail)
	return results
