"""
Threshold and purification-strategy tables.
"""

import logging
from dataclasses import asdict, dataclass

from steerpy import SteerpyParams
from steerpy.errors import NeverSecure
from steerpy.protocol import keyrate
from steerpy.purify import bbpssw
from steerpy.quantum import channels, states

logger = logging.getLogger(__name__)

SHORT_KM = 15.0
LONG_KM = 35.0


@dataclass(frozen=True)
class ThresholdRow:
	noise_kind: str
	steering_root: float
	key_rate_root: float
	esd: float
	residual_concurrence: float
	lc_km: float
	reference_param: float
	reference_fidelity: float

	def to_dict(self):
		return asdict(self)


@dataclass(frozen=True)
class ThresholdTable:
	eta_b: float
	reference_km: float
	rows: tuple

	def row(self, kind):
		kind = channels.NoiseKind(kind).value
		return next(r for r in self.rows if r.noise_kind == kind)

	def to_dict(self):
		return {'eta_b': self.eta_b, 'reference_km': self.reference_km, 'rows': [r.to_dict() for r in self.rows]}


@dataclass(frozen=True)
class StrategyRow:
	noise_kind: str
	regime: str
	l_km: float
	best_round: int
	effective_rate: float
	fidelity: float
	secure: bool

	def to_dict(self):
		return asdict(self)


def regime(l_km):
	if l_km < SHORT_KM:
		return 'short'
	if l_km <= LONG_KM:
		return 'medium'
	return 'long'


def _phi_plus_through(kind, param):
	return channels.apply_one_sided(channels.make_channel(kind, param), states.bell_state('phi_plus'))


def threshold_table(eta_b=SteerpyParams.etaB, method=keyrate.BoundMethod.STEERING_ANALYTIC,
					binning=keyrate.Binning.ASSIGN_ZERO, reference_km=SteerpyParams.referenceKm,
					tol=SteerpyParams.searchTol):
	"""Per channel: steering, key-rate and ESD thresholds and the state at the reference length."""
	rows = []
	for kind in channels.NOISE_KINDS:
		try:
			crit = keyrate.critical_noise(kind, eta_b, method, binning, tol)
			key_root, steer_root = crit.key_rate_root, crit.steering_root
			residual = states.concurrence(_phi_plus_through(kind, key_root))
		except NeverSecure as e:
			logger.warning('Caught exception: {}'.format(e))
			key_root = steer_root = residual = float('nan')
		lc_km = channels.DEFAULT_COHERENCE_KM[kind]
		ref = channels.DistanceModel(reference_km, lc_km)
		ref_param = channels.noise_parameter(kind, ref)
		rows.append(ThresholdRow(
			noise_kind=kind.value,
			steering_root=float(steer_root),
			key_rate_root=float(key_root),
			esd=float(keyrate.esd_threshold(kind, tol)),
			residual_concurrence=float(residual),
			lc_km=lc_km,
			reference_param=ref_param,
			reference_fidelity=states.fidelity_phi_plus(_phi_plus_through(kind, ref_param)),
		))
	return ThresholdTable(float(eta_b), float(reference_km), tuple(rows))


def strategy_table(kind, distances=(10.0, 25.0, 45.0), eta_b=SteerpyParams.etaB, lc_km=None,
				   max_rounds=SteerpyParams.maxRounds, twirl_each_round=SteerpyParams.twirlEachRound):
	"""Purification depth that maximises the effective key rate at each length."""
	kind = channels.NoiseKind(kind)
	lc_km = channels.DEFAULT_COHERENCE_KM[kind] if lc_km is None else lc_km
	security = keyrate.SecurityConfig(eta_b)
	rows = []
	for l_km in distances:
		s = channels.apply_one_sided(channels.from_distance(kind, channels.DistanceModel(l_km, lc_km)),
									 states.bell_state('phi_plus'))
		trace = bbpssw.purify_iterate(s, max_rounds, twirl_each_round, security)
		best, curve = bbpssw.effective_rate_curve(trace)
		rows.append(StrategyRow(
			noise_kind=kind.value,
			regime=regime(l_km),
			l_km=float(l_km),
			best_round=best,
			effective_rate=float(curve[best]),
			fidelity=trace.rounds[best].fidelity,
			secure=curve[best] > 0,
		))
	return tuple(rows)
