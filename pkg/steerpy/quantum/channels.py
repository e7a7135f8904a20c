"""
Single-qubit noise channels in Kraus form, their distance parameterisation,
composition, and one-sided application to a two-qubit state.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from steerpy import SteerpyParams
from steerpy.errors import ChannelError, InvalidParameter
from steerpy.quantum import qmat
from steerpy.quantum.states import TwoQubitState

logger = logging.getLogger(__name__)


class NoiseKind(str, Enum):
	DEPHASING = 'dephasing'
	DEPOLARIZING = 'depolarizing'
	AMPLITUDE_DAMPING = 'amplitude_damping'
	IDENTITY = 'identity'
	COMPOSITE = 'composite'


class Side(str, Enum):
	TRAVELING = 'traveling'
	STATIONARY = 'stationary'


NOISE_KINDS = (NoiseKind.DEPHASING, NoiseKind.DEPOLARIZING, NoiseKind.AMPLITUDE_DAMPING)

PARAM_RANGES = {
	NoiseKind.DEPHASING: (0.0, 0.5),
	NoiseKind.DEPOLARIZING: (0.0, 1.0),
	NoiseKind.AMPLITUDE_DAMPING: (0.0, 1.0),
	NoiseKind.IDENTITY: (0.0, 0.0),
}

# km; dephasing and depolarizing share one coherence length, damping is shorter
DEFAULT_COHERENCE_KM = {NoiseKind(k): float(v) for k, v in SteerpyParams.coherenceKm.items()}

# the qubit index each side occupies in a two-qubit register
SIDE_QUBIT = {Side.TRAVELING: 0, Side.STATIONARY: 1}


@dataclass(frozen=True, eq=False)
class KrausChannel:
	kind: NoiseKind
	kraus_ops: tuple
	param: float = 0.0
	stages: tuple = ()

	def __post_init__(self):
		ops = tuple(qmat.as_cmatrix(k) for k in self.kraus_ops)
		if not ops or any(k.shape != (2, 2) for k in ops):
			raise InvalidParameter('Kraus operators must be a nonempty list of 2x2 matrices.')
		for k in ops:
			k.setflags(write=False)
		object.__setattr__(self, 'kraus_ops', ops)
		object.__setattr__(self, 'kind', NoiseKind(self.kind))
		check_cptp(self)

	def __call__(self, rho):
		return sum(k @ rho @ qmat.dagger(k) for k in self.kraus_ops)

	def describe(self):
		if self.kind == NoiseKind.COMPOSITE:
			return ' -> '.join(st.describe() for st in self.stages)
		return '{}({:.6g})'.format(self.kind.value, self.param)


@dataclass(frozen=True)
class DistanceModel:
	length_km: float
	coherence_km: float

	def __post_init__(self):
		if self.length_km < 0:
			raise InvalidParameter('Fibre length must be nonnegative, got {}.'.format(self.length_km))
		if self.coherence_km <= 0:
			raise InvalidParameter('Coherence length must be positive, got {}.'.format(self.coherence_km))

	@classmethod
	def default_for(cls, kind, length_km):
		return cls(length_km, DEFAULT_COHERENCE_KM[NoiseKind(kind)])


def _check_param(kind, value):
	lo, hi = PARAM_RANGES[kind]
	if not lo <= value <= hi:
		raise InvalidParameter('{} parameter {} outside [{}, {}].'.format(kind.value, value, lo, hi))
	return float(value)


def completeness_error(ch):
	total = sum(qmat.dagger(k) @ k for k in ch.kraus_ops)
	return float(np.max(np.abs(total - qmat.I2)))


def check_cptp(ch, tol=qmat.STRUCTURAL_TOL):
	err = completeness_error(ch)
	if err > tol:
		raise ChannelError('{} violates completeness by {:.3e}.'.format(ch.kind.value, err))
	return err


def identity():
	return KrausChannel(NoiseKind.IDENTITY, (qmat.I2,), 0.0)


def dephasing(p):
	p = _check_param(NoiseKind.DEPHASING, p)
	return KrausChannel(NoiseKind.DEPHASING, (np.sqrt(1 - p) * qmat.I2, np.sqrt(p) * qmat.Z), p)


def depolarizing(q):
	"""(1-q) rho + q I/2, as weights (1-3q/4, q/4, q/4, q/4) on I, X, Y, Z."""
	q = _check_param(NoiseKind.DEPOLARIZING, q)
	ops = (np.sqrt(1 - 3 * q / 4) * qmat.I2,
		   np.sqrt(q / 4) * qmat.X,
		   np.sqrt(q / 4) * qmat.Y,
		   np.sqrt(q / 4) * qmat.Z)
	return KrausChannel(NoiseKind.DEPOLARIZING, ops, q)


def amplitude_damping(gamma):
	g = _check_param(NoiseKind.AMPLITUDE_DAMPING, gamma)
	k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=complex)
	k1 = np.array([[0, np.sqrt(g)], [0, 0]], dtype=complex)
	return KrausChannel(NoiseKind.AMPLITUDE_DAMPING, (k0, k1), g)


_FACTORIES = {
	NoiseKind.DEPHASING: dephasing,
	NoiseKind.DEPOLARIZING: depolarizing,
	NoiseKind.AMPLITUDE_DAMPING: amplitude_damping,
}


def make_channel(kind, param):
	kind = NoiseKind(kind)
	if kind == NoiseKind.IDENTITY:
		return identity()
	if kind not in _FACTORIES:
		raise InvalidParameter('Cannot build a {} channel from a single parameter.'.format(kind.value))
	return _FACTORIES[kind](param)


def noise_parameter(kind, distance):
	"""Noise strength after `distance.length_km` of fibre."""
	kind = NoiseKind(kind)
	decay = -np.expm1(-distance.length_km / distance.coherence_km)
	if kind == NoiseKind.DEPHASING:
		return float(decay / 2)
	if kind in (NoiseKind.DEPOLARIZING, NoiseKind.AMPLITUDE_DAMPING):
		return float(decay)
	raise InvalidParameter('No distance map for {}.'.format(kind.value))


def from_distance(kind, distance):
	return make_channel(kind, noise_parameter(kind, distance))


def compose(*channels):
	"""Channel applying `channels` in the given order (first argument first)."""
	if not channels:
		return identity()
	if len(channels) == 1:
		return channels[0]
	ops = (qmat.I2,)
	for ch in channels:
		ops = tuple(k @ prev for k in ch.kraus_ops for prev in ops)
	stages = []
	for ch in channels:
		stages.extend(ch.stages if ch.kind == NoiseKind.COMPOSITE else (ch,))
	return KrausChannel(NoiseKind.COMPOSITE, ops, float('nan'), tuple(stages))


def apply_to_qubit(ch, rho, qubit, n):
	"""Apply a single-qubit channel to one qubit of an n-qubit density matrix."""
	out = sum(qmat.embed(k, qubit, n) @ rho @ qmat.dagger(qmat.embed(k, qubit, n)) for k in ch.kraus_ops)
	return (out + qmat.dagger(out)) / 2


def apply_one_sided(ch, s, side=Side.TRAVELING):
	check_cptp(ch)
	side = Side(side)
	rho = apply_to_qubit(ch, s.rho, SIDE_QUBIT[side], 2)
	label = '{} <- {}[{}]'.format(s.label, ch.describe(), side.value) if s.label else ''
	return TwoQubitState(rho, label)
