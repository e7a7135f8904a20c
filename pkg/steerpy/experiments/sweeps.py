"""
Parameter sweeps and purification grids.

Every sweep returns a SweepResult whose rows are flat dicts keyed by the CSV
columns in steerpy.writer.report, one row per grid point in grid order.
"""

import logging
import multiprocessing as mp
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from steerpy import SteerpyParams
from steerpy.experiments.scenario import NoiseStage, Scenario
from steerpy.protocol import keyrate
from steerpy.protocol.search import find_boundary
from steerpy.purify import bbpssw
from steerpy.quantum import channels, states

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Crossing:
	"""Sign change of `quantity` along `axis`."""
	quantity: str
	axis: str
	interpolated: float
	refined: float = None
	direction: str = 'down'

	def to_dict(self):
		return {'quantity': self.quantity, 'axis': self.axis, 'interpolated': self.interpolated,
				'refined': self.refined, 'direction': self.direction}

	@classmethod
	def from_dict(cls, d):
		return cls(**d)


@dataclass(frozen=True)
class SweepResult:
	axes: tuple
	grid: tuple
	rows: tuple
	columns: tuple
	crossings: tuple = field(default_factory=tuple)
	optimum: dict = None

	def column(self, name):
		return [row[name] for row in self.rows]

	def to_dict(self):
		d = {'axes': list(self.axes),
			 'grid': [list(map(float, g)) for g in self.grid],
			 'rows': [dict(r) for r in self.rows],
			 'columns': list(self.columns),
			 'crossings': [c.to_dict() for c in self.crossings]}
		if self.optimum is not None:
			d['optimum'] = dict(self.optimum)
		return d

	@classmethod
	def from_dict(cls, d):
		"""Inverse of to_dict, for results read back from json."""
		return cls(tuple(d['axes']),
				   tuple(np.asarray(g, dtype=float) for g in d['grid']),
				   tuple(dict(r) for r in d['rows']),
				   tuple(d['columns']),
				   tuple(Crossing.from_dict(c) for c in d.get('crossings', ())),
				   d.get('optimum'))


SWEEP_COLUMNS = ('noise_kind', 'param', 'eta_b', 'theta', 's2', 'h_ab', 'h_ae_bound', 'key_rate',
				 'concurrence', 'secure')
CONTOUR_COLUMNS = ('noise_kind', 'lc_km', 'l_km', 'round', 'fidelity', 'success_prob', 'yield', 'key_rate',
				   'effective_rate', 'diverged')
TRACE_COLUMNS = ('round', 'fidelity', 'success_prob', 'yield', 'key_rate', 'effective_rate')


def parameter_grid(lo, hi, step):
	"""lo, lo+step, ..., hi, rounded so repeated runs give identical values."""
	n = int(np.floor((hi - lo) / step + 1e-9))
	return np.round(lo + step * np.arange(n + 1), 10)


def zero_crossings(xs, ys, quantity='key_rate', axis='x', refine=None, tol=SteerpyParams.searchTol):
	"""
	Sign changes between adjacent samples, located by linear interpolation.

	With `refine` (x -> y), each bracket is also bisected to `tol`; both values
	are kept.
	"""
	found = []
	for i in range(len(xs) - 1):
		y0, y1 = ys[i], ys[i + 1]
		if (y0 > 0) == (y1 > 0):
			continue
		x0, x1 = float(xs[i]), float(xs[i + 1])
		x_lin = x0 if y1 == y0 else x0 - y0 * (x1 - x0) / (y1 - y0)
		down = y0 > 0
		refined = None
		if refine is not None:
			refined = float(find_boundary(refine, x0, x1, tol, decreasing=down))
		found.append(Crossing(quantity, axis, float(x_lin), refined, 'down' if down else 'up'))
	return tuple(found)


def _sweep_row(scenario, report, param=None):
	return {
		'noise_kind': scenario.noise_kind,
		'param': float(scenario.noise_param if param is None else param),
		'eta_b': report.eta_b,
		'theta': float(scenario.theta),
		's2': report.s2,
		'h_ab': report.h_ab,
		'h_ae_bound': report.h_ae_bound,
		'key_rate': report.key_rate,
		'concurrence': report.concurrence,
		'secure': report.secure,
	}


def sweep_efficiency(sc, n_points=SteerpyParams.etaPoints, eta_range=SteerpyParams.etaRange):
	"""Key rate against Bob's detection efficiency for a fixed noisy state."""
	etas = np.linspace(eta_range[0], eta_range[1], n_points)
	s = sc.state()

	def rate(eta):
		return keyrate.key_rate(s, keyrate.MeasurementModel(eta), sc.bound, sc.binning).key_rate

	rows = []
	for eta in etas:
		report = keyrate.key_rate(s, keyrate.MeasurementModel(float(eta)), sc.bound, sc.binning)
		rows.append(_sweep_row(sc, report))
	ys = [r['key_rate'] for r in rows]
	crossings = zero_crossings(etas, ys, 'key_rate', 'eta_b', refine=rate)
	return SweepResult(('eta_b',), (etas,), tuple(rows), SWEEP_COLUMNS, crossings)


def sweep_noise(kind, eta_b=SteerpyParams.etaB, n_points=None, step=SteerpyParams.noiseStep, base=None):
	"""
	Key rate, S2 and concurrence against one channel's noise strength.

	The grid runs over the channel's whole parameter range at `step`, or at
	`n_points` evenly spaced values when given. `base` supplies theta, side and
	the security settings.
	"""
	kind = channels.NoiseKind(kind)
	base = base or Scenario()
	lo, hi = channels.PARAM_RANGES[kind]
	params = np.linspace(lo, hi, n_points) if n_points else parameter_grid(lo, hi, step)
	m = keyrate.MeasurementModel(eta_b)
	s0 = states.psi_theta(base.theta)

	def noisy(param):
		return channels.apply_one_sided(channels.make_channel(kind, param), s0, base.side)

	rows = []
	for param in params:
		sc = base.replace(noise=[{'kind': kind.value, 'param': float(param)}], eta_b=eta_b)
		report = keyrate.key_rate(noisy(float(param)), m, base.bound, base.binning)
		rows.append(_sweep_row(sc, report))

	def rate(param):
		return keyrate.key_rate(noisy(param), m, base.bound, base.binning).key_rate

	def steering(param):
		return keyrate.steering_s2(keyrate.statistics(noisy(param), m), base.binning) - keyrate.STEERING_BOUND

	def conc(param):
		return states.concurrence(noisy(param)) - 1e-12

	ys = {name: [r[name] for r in rows] for name in ('key_rate', 's2', 'concurrence')}
	crossings = (
		zero_crossings(params, ys['key_rate'], 'key_rate', 'param', refine=rate)
		+ zero_crossings(params, [v - keyrate.STEERING_BOUND for v in ys['s2']], 's2', 'param', refine=steering)
		+ zero_crossings(params, [v - 1e-12 for v in ys['concurrence']], 'concurrence', 'param', refine=conc)
	)
	return SweepResult(('param',), (params,), tuple(rows), SWEEP_COLUMNS, crossings)


def sweep_theta(eta_b=SteerpyParams.etaB, n_points=SteerpyParams.thetaPoints, base=None):
	"""Key rate over theta in [0, pi/2], plus the optimum from bounded scalar optimisation."""
	base = base or Scenario()
	thetas = np.linspace(0.0, np.pi / 2, n_points)
	ch = base.channel()
	m = keyrate.MeasurementModel(eta_b)

	def report_at(theta):
		s = channels.apply_one_sided(ch, states.psi_theta(min(max(theta, 0.0), np.pi / 2)), base.side)
		return keyrate.key_rate(s, m, base.bound, base.binning)

	def rate(theta):
		return report_at(theta).key_rate

	rows = []
	for theta in thetas:
		rows.append(_sweep_row(base.replace(theta=float(theta), eta_b=eta_b), report_at(float(theta))))
	ys = [r['key_rate'] for r in rows]
	crossings = zero_crossings(thetas, ys, 'key_rate', 'theta', refine=rate)

	res = minimize_scalar(lambda th: -rate(th), bounds=(0.0, np.pi / 2), method='bounded',
						  options={'xatol': 1e-8})
	optimum = {'theta': float(res.x), 'key_rate': float(-res.fun)}
	logger.info('Optimal theta %.6f with key rate %.6f', res.x, -res.fun)
	return SweepResult(('theta',), (thetas,), tuple(rows), SWEEP_COLUMNS, crossings, optimum)


def _contour_rows(kind, lc_km, l_km, rounds, security, twirl_each_round):
	"""All rounds of one fibre length; a top-level function so the pool can pickle it."""
	kind = channels.NoiseKind(kind)
	s = channels.apply_one_sided(channels.from_distance(kind, channels.DistanceModel(l_km, lc_km)),
								 states.bell_state('phi_plus'))
	trace = bbpssw.purify_iterate(s, rounds[1], twirl_each_round, security)
	raw = trace.rounds[0]
	rows = []
	for rec in trace.rounds[rounds[0]:]:
		rate = raw.key_rate if trace.diverged else rec.key_rate
		rows.append({
			'noise_kind': kind.value,
			'lc_km': float(lc_km),
			'l_km': float(l_km),
			'round': rec.n,
			'fidelity': rec.fidelity,
			'success_prob': rec.success_prob,
			'yield': rec.cumulative_yield,
			'key_rate': rate,
			'effective_rate': max(rate, 0.0) * rec.cumulative_yield,
			'diverged': trace.diverged,
		})
	return rows


def _contour_worker(args):
	return _contour_rows(*args)


def contour_grid(kind, lc_km=None, l_range=(0.0, SteerpyParams.lMaxKm), l_step=SteerpyParams.lStepKm,
				 rounds_range=(0, SteerpyParams.contourRounds), eta_b=SteerpyParams.etaB, security=None,
				 twirl_each_round=SteerpyParams.twirlEachRound, workers=SteerpyParams.workers):
	"""
	Signed key rate over (fibre length, purification round).

	Rows are ordered by length, then round. With workers > 1 the lengths are
	spread over a spawn-context process pool; pool.map keeps the order.
	"""
	kind = channels.NoiseKind(kind)
	lc_km = channels.DEFAULT_COHERENCE_KM[kind] if lc_km is None else lc_km
	security = security or keyrate.SecurityConfig(eta_b)
	lengths = parameter_grid(l_range[0], l_range[1], l_step)
	rounds = (int(rounds_range[0]), int(rounds_range[1]))
	jobs = [(kind.value, lc_km, float(l), rounds, security, twirl_each_round) for l in lengths]

	if workers > 1:
		ctx = mp.get_context('spawn')
		with ctx.Pool(processes=workers) as pool:
			columns = pool.map(_contour_worker, jobs)
	else:
		columns = [_contour_worker(job) for job in jobs]

	rows = tuple(row for col in columns for row in col)
	round_axis = np.arange(rounds[0], rounds[1] + 1)
	logger.info('Contour %s: %d lengths x %d rounds', kind.value, len(lengths), len(round_axis))
	return SweepResult(('l_km', 'round'), (lengths, round_axis), rows, CONTOUR_COLUMNS)


def secure_cells_per_round(result):
	"""{round: number of lengths with a positive key rate}."""
	counts = {int(n): 0 for n in result.grid[1]}
	for row in result.rows:
		if row['key_rate'] > 0:
			counts[int(row['round'])] += 1
	return counts


def zero_contour(result):
	"""Per round, the fibre length where the key rate turns nonpositive (linear interpolation)."""
	contour = {}
	for n in result.grid[1]:
		rows = [r for r in result.rows if r['round'] == n]
		xs = [r['l_km'] for r in rows]
		ys = [r['key_rate'] for r in rows]
		cross = [c.interpolated for c in zero_crossings(xs, ys, 'key_rate', 'l_km') if c.direction == 'down']
		contour[int(n)] = cross[-1] if cross else None
	return contour


def trace_rows(trace):
	return tuple({
		'round': r.n,
		'fidelity': r.fidelity,
		'success_prob': r.success_prob,
		'yield': r.cumulative_yield,
		'key_rate': r.key_rate,
		'effective_rate': r.effective_rate,
	} for r in trace.rounds)


def distance_sweep(kind, lc_km=None, l_range=(0.0, SteerpyParams.lMaxKm), l_step=SteerpyParams.lStepKm,
				   eta_b=SteerpyParams.etaB, base=None):
	"""Plain key rate against fibre length (no purification)."""
	kind = channels.NoiseKind(kind)
	base = base or Scenario()
	lc_km = channels.DEFAULT_COHERENCE_KM[kind] if lc_km is None else lc_km
	lengths = parameter_grid(l_range[0], l_range[1], l_step)
	rows = []
	for l in lengths:
		sc = base.replace(noise=[NoiseStage(kind.value, length_km=float(l), lc_km=lc_km).to_dict()],
						  eta_b=eta_b, theta=SteerpyParams.theta)
		rows.append(_sweep_row(sc, sc.security.evaluate(sc.state())))
	return SweepResult(('l_km',), (lengths,), tuple(rows), SWEEP_COLUMNS)
