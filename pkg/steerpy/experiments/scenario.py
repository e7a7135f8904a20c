"""
Scenario files: one state preparation, one noise path and one security setting.

Example (yaml; json is read the same way):

	theta: 0.7853981633974483
	eta_b: 0.9
	side: traveling
	noise:
	  - {kind: dephasing, length_km: 30, lc_km: 40}
	  - {kind: depolarizing, param: 0.05}
	rounds: 6
"""

import logging
import math
from dataclasses import dataclass, field

import yaml

from steerpy import SteerpyParams
from steerpy.errors import InvalidParameter
from steerpy.protocol.keyrate import Binning, BoundMethod, SecurityConfig
from steerpy.quantum import channels, states

logger = logging.getLogger(__name__)


def _check_keys(d, allowed, what):
	invalid_keys = [key for key in d.keys() if key not in allowed]
	if len(invalid_keys) > 0:
		invalid_key_msg = [" %s," % key for key in invalid_keys]
		msg = "Unrecognized keys in the %s: %s" % (what, "".join(invalid_key_msg))
		raise ValueError(msg)


def _number(value, name, kind=float):
	if isinstance(value, bool):
		raise InvalidParameter('{}={!r} is not a number.'.format(name, value))
	try:
		x = float(value)
	except (TypeError, ValueError):
		raise InvalidParameter('{}={!r} is not a number.'.format(name, value))
	if kind is int:
		if not math.isfinite(x) or x != int(x):
			raise InvalidParameter('{}={!r} is not an integer.'.format(name, value))
		return int(x)
	return x


def _mapping(d, what):
	if not isinstance(d, dict):
		raise InvalidParameter('The {} must be a mapping of keys to values, got {!r}.'.format(what, d))
	return d


@dataclass(frozen=True)
class NoiseStage:
	kind: str
	param: float = None
	length_km: float = None
	lc_km: float = None

	def __post_init__(self):
		kind = channels.NoiseKind(self.kind)
		if kind == channels.NoiseKind.COMPOSITE:
			raise InvalidParameter('A noise stage must be a single channel kind.')
		object.__setattr__(self, 'kind', kind.value)
		for key in ('param', 'length_km', 'lc_km'):
			if getattr(self, key) is not None:
				object.__setattr__(self, key, _number(getattr(self, key), key))
		if self.param is not None and self.length_km is not None:
			raise InvalidParameter('Give either param or length_km for {}, not both.'.format(kind.value))

	@property
	def distance(self):
		if self.length_km is None:
			return None
		if self.lc_km is None:
			return channels.DistanceModel.default_for(self.kind, self.length_km)
		return channels.DistanceModel(self.length_km, self.lc_km)

	def resolved_param(self):
		if self.kind == channels.NoiseKind.IDENTITY.value:
			return 0.0
		if self.length_km is not None:
			return channels.noise_parameter(self.kind, self.distance)
		return 0.0 if self.param is None else float(self.param)

	def channel(self):
		return channels.make_channel(self.kind, self.resolved_param())

	def to_dict(self):
		d = {'kind': self.kind}
		for key in ('param', 'length_km', 'lc_km'):
			if getattr(self, key) is not None:
				d[key] = getattr(self, key)
		return d

	@classmethod
	def from_dict(cls, d):
		_check_keys(_mapping(d, 'noise stage'), ('kind', 'param', 'length_km', 'lc_km'), 'noise stage')
		return cls(**d)


@dataclass(frozen=True)
class Scenario:
	theta: float = SteerpyParams.theta
	noise: tuple = field(default_factory=tuple)
	side: str = SteerpyParams.side
	eta_b: float = SteerpyParams.etaB
	binning: str = SteerpyParams.binning
	bound: str = SteerpyParams.bound
	rounds: int = SteerpyParams.rounds
	twirl_each_round: bool = SteerpyParams.twirlEachRound
	label: str = ''

	def __post_init__(self):
		for key in ('theta', 'eta_b'):
			object.__setattr__(self, key, _number(getattr(self, key), key))
		object.__setattr__(self, 'rounds', _number(self.rounds, 'rounds', int))
		if not isinstance(self.twirl_each_round, bool):
			raise InvalidParameter('twirl_each_round={!r} is not true or false.'.format(self.twirl_each_round))
		object.__setattr__(self, 'label', str(self.label))
		if not 0 <= self.theta <= math.pi / 2:
			raise InvalidParameter('theta={} outside [0, pi/2].'.format(self.theta))
		noise = tuple(st if isinstance(st, NoiseStage) else NoiseStage.from_dict(st) for st in self.noise)
		object.__setattr__(self, 'noise', noise)
		object.__setattr__(self, 'side', channels.Side(self.side).value)
		object.__setattr__(self, 'binning', Binning(self.binning).value)
		object.__setattr__(self, 'bound', BoundMethod(self.bound).value)
		if not 0 <= self.rounds <= SteerpyParams.maxRounds:
			raise InvalidParameter('rounds={} outside [0, {}].'.format(self.rounds, SteerpyParams.maxRounds))
		# fail early on out-of-range parameters
		self.channel()
		SecurityConfig(self.eta_b)

	@property
	def security(self):
		return SecurityConfig(self.eta_b, self.bound, self.binning)

	@property
	def noise_kind(self):
		if not self.noise:
			return channels.NoiseKind.IDENTITY.value
		if len(self.noise) == 1:
			return self.noise[0].kind
		return channels.NoiseKind.COMPOSITE.value

	@property
	def noise_param(self):
		"""Single-stage noise strength, NaN for compositions."""
		if not self.noise:
			return 0.0
		if len(self.noise) == 1:
			return self.noise[0].resolved_param()
		return float('nan')

	def channel(self):
		return channels.compose(*[st.channel() for st in self.noise])

	def state(self):
		s = states.psi_theta(self.theta)
		return channels.apply_one_sided(self.channel(), s, self.side)

	def replace(self, **changes):
		d = self.to_dict()
		d.update(changes)
		return Scenario.from_dict(d)

	def to_dict(self):
		return {
			'theta': self.theta,
			'noise': [st.to_dict() for st in self.noise],
			'side': self.side,
			'eta_b': self.eta_b,
			'binning': self.binning,
			'bound': self.bound,
			'rounds': self.rounds,
			'twirl_each_round': self.twirl_each_round,
			'label': self.label,
		}

	@classmethod
	def from_dict(cls, d):
		d = dict(_mapping(d or {}, 'scenario'))
		_check_keys(d, SCENARIO_KEYS, 'scenario')
		noise = d.pop('noise', ()) or ()
		if isinstance(noise, dict):
			noise = [noise]
		if not isinstance(noise, (list, tuple)):
			raise InvalidParameter('noise must be a list of stages, got {!r}.'.format(noise))
		return cls(noise=tuple(NoiseStage.from_dict(st) if isinstance(st, dict) else st for st in noise), **d)


SCENARIO_KEYS = ('theta', 'noise', 'side', 'eta_b', 'binning', 'bound', 'rounds', 'twirl_each_round', 'label')


def LoadConfig(config_path):
	with open(config_path, 'rb') as f:
		config = yaml.safe_load(f)
	if config is None:
		return {}
	return _mapping(config, 'config in {}'.format(config_path))


def load_scenario(path):
	scenario = Scenario.from_dict(LoadConfig(path))
	logger.info('Loaded scenario from %s: %s', path, scenario.to_dict())
	return scenario
