"""
Measurement statistics of the one-sided device-independent BBM92 protocol and
the asymptotic key-rate bound built on them.

Alice (qubit 0) is trusted and measures sigma_z (x=1) or sigma_x (x=2). Bob's
device is untrusted; it measures sigma_z (y=1) or sigma_x (y=2) and fails to
click with probability 1 - eta_b, giving a third outcome (no-click).
"""

import logging
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
from scipy.stats import entropy

from steerpy.errors import InvalidParameter, NeverSecure
from steerpy.protocol.search import find_boundary
from steerpy.quantum import channels, qmat, states

logger = logging.getLogger(__name__)

STEERING_BOUND = 1 / np.sqrt(2)
NO_CLICK = 2
PROB_CLAMP = 1e-14
# entropy and bound residue treated as exact
ROUNDING_TOL = 1e-12


class Binning(str, Enum):
	ASSIGN_ZERO = 'assign_zero'
	DISCARD = 'discard'


class BoundMethod(str, Enum):
	STEERING_ANALYTIC = 'steering_analytic'


_BASES = {
	1: (qmat.projector(qmat.KET0), qmat.projector(qmat.KET1)),
	2: (qmat.projector(qmat.KET_PLUS), qmat.projector(qmat.KET_MINUS)),
}
SETTINGS = (1, 2)


@dataclass(frozen=True)
class MeasurementModel:
	eta_b: float = 1.0

	def __post_init__(self):
		if not 0 <= self.eta_b <= 1:
			raise InvalidParameter('Detection efficiency {} outside [0, 1].'.format(self.eta_b))

	def alice_projectors(self, x):
		return _BASES[x]

	def bob_povm(self, y):
		"""(M_0, M_1, M_noclick) for Bob's setting y."""
		p0, p1 = _BASES[y]
		return (self.eta_b * p0, self.eta_b * p1, (1 - self.eta_b) * qmat.I2)


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
	"""p[x-1, y-1, a, b] with b = 2 standing for no-click."""
	p: np.ndarray
	eta_b: float

	def joint(self, x, y):
		return self.p[x - 1, y - 1]

	def alice_marginal(self, x, y):
		return self.joint(x, y).sum(axis=1)

	def bob_marginal(self, x, y):
		return self.joint(x, y).sum(axis=0)

	def no_click(self, x, y):
		return float(self.bob_marginal(x, y)[NO_CLICK])


@dataclass(frozen=True)
class KeyRateReport:
	s2: float
	h_ab: float
	h_ae_bound: float
	key_rate: float
	concurrence: float
	bound_method: str
	binning: str
	eta_b: float
	secure: bool

	@property
	def clamped_rate(self):
		return max(self.key_rate, 0.0)

	def to_dict(self):
		return asdict(self)

	@classmethod
	def from_dict(cls, d):
		d = dict(d)
		for key in ('s2', 'h_ab', 'h_ae_bound', 'key_rate', 'concurrence', 'eta_b'):
			d[key] = float(d[key])
		secure = d['secure']
		d['secure'] = secure if isinstance(secure, bool) else str(secure).lower() == 'true'
		return cls(**d)


@dataclass(frozen=True)
class SecurityConfig:
	"""Everything needed to turn a state into a key-rate report."""
	eta_b: float = 1.0
	method: BoundMethod = BoundMethod.STEERING_ANALYTIC
	binning: Binning = Binning.ASSIGN_ZERO

	def __post_init__(self):
		object.__setattr__(self, 'method', BoundMethod(self.method))
		object.__setattr__(self, 'binning', Binning(self.binning))
		MeasurementModel(self.eta_b)

	@property
	def model(self):
		return MeasurementModel(self.eta_b)

	def evaluate(self, s):
		return key_rate(s, self.model, self.method, self.binning)


@dataclass(frozen=True)
class CriticalNoise:
	kind: str
	eta_b: float
	key_rate_root: float
	steering_root: float


def statistics(s, m):
	"""p(a,b|x,y) = Tr[(A_a(x) (x) M_b(y)) rho]."""
	p = np.zeros((2, 2, 2, 3))
	rho_a = qmat.partial_trace(s.rho, [0])
	for x in SETTINGS:
		alice = m.alice_projectors(x)
		pa = np.clip([np.real(np.trace(pr @ rho_a)) for pr in alice], 0.0, None)
		pa = pa / pa.sum()
		for y in SETTINGS:
			m0, m1, _ = m.bob_povm(y)
			for a in (0, 1):
				for b, mb in enumerate((m0, m1)):
					p[x - 1, y - 1, a, b] = np.real(np.trace(qmat.tensor(alice[a], mb) @ s.rho))
				# the no-click element is (1 - eta) I, so it only sees Alice's marginal
				p[x - 1, y - 1, a, NO_CLICK] = (1 - m.eta_b) * pa[a]
	low = p.min()
	if low < -PROB_CLAMP:
		logger.warning('Probability %.3e below clamp tolerance.', low)
	p = np.clip(p, 0.0, None)
	p.setflags(write=False)
	return ProbabilityTable(p, m.eta_b)


def _sign(outcome):
	return 1.0 if outcome == 0 else -1.0


def correlator(t, x, y, binning=Binning.ASSIGN_ZERO):
	"""<A_x B_y> with outcomes mapped to +1/-1."""
	binning = Binning(binning)
	joint = t.joint(x, y)
	num = sum(_sign(a) * _sign(b) * joint[a, b] for a in (0, 1) for b in (0, 1))
	if binning == Binning.ASSIGN_ZERO:
		return float(num + sum(_sign(a) * joint[a, NO_CLICK] for a in (0, 1)))
	detected = float(joint[:, :NO_CLICK].sum())
	if detected <= 0:
		return 0.0
	return float(num / detected)


def steering_s2(t, binning=Binning.ASSIGN_ZERO):
	return 0.5 * (correlator(t, 1, 1, binning) + correlator(t, 2, 2, binning))


def binary_entropy(p):
	return float(entropy([p, 1 - p], base=2))


def h_a_given_b(t):
	"""H(A1|B1) over the three-outcome distribution, in bits."""
	joint = t.joint(1, 1)
	h = entropy(joint.ravel(), base=2) - entropy(joint.sum(axis=0), base=2)
	return 0.0 if h < ROUNDING_TOL else float(h)


_BOUNDS = {}


def register_bound(method):
	"""Register a function s2 -> lower bound on H(A1|E) under `method`."""
	method = BoundMethod(method)

	def _register(fn):
		_BOUNDS[method] = fn
		return fn
	return _register


@register_bound(BoundMethod.STEERING_ANALYTIC)
def _steering_analytic(s2):
	if s2 <= STEERING_BOUND:
		return 0.0
	v = 2 * s2 ** 2 - 1
	if v >= 1 - ROUNDING_TOL:
		return 1.0
	return 1.0 - binary_entropy((1 + np.sqrt(v)) / 2)


def h_a_given_e_bound(s2, method=BoundMethod.STEERING_ANALYTIC):
	method = BoundMethod(method)
	if method not in _BOUNDS:
		raise InvalidParameter('No bound registered for {}.'.format(method.value))
	s2 = min(max(float(s2), 0.0), 1.0)
	return float(min(max(_BOUNDS[method](s2), 0.0), 1.0))


def key_rate(s, m, method=BoundMethod.STEERING_ANALYTIC, binning=Binning.ASSIGN_ZERO):
	method, binning = BoundMethod(method), Binning(binning)
	t = statistics(s, m)
	s2 = steering_s2(t, binning)
	h_ab = h_a_given_b(t)
	h_ae = h_a_given_e_bound(s2, method)
	r = h_ae - h_ab
	if binning == Binning.DISCARD:
		logger.debug('Discard binning is post-selected; report is diagnostic only.')
	return KeyRateReport(
		s2=float(s2),
		h_ab=h_ab,
		h_ae_bound=h_ae,
		key_rate=float(r),
		concurrence=states.concurrence(s),
		bound_method=method.value,
		binning=binning.value,
		eta_b=float(m.eta_b),
		secure=bool(r > 0 and binning == Binning.ASSIGN_ZERO),
	)


def sifted_fraction(t, p_key_alice=0.5, p_key_bob=0.5):
	"""Share of rounds with x = y = 1 and a click on Bob's side."""
	detected = float(t.joint(1, 1)[:, :NO_CLICK].sum())
	return p_key_alice * p_key_bob * detected


def min_efficiency(s, method=BoundMethod.STEERING_ANALYTIC, binning=Binning.ASSIGN_ZERO, tol=1e-4):
	"""Smallest eta_b with a positive key rate."""
	def rate(eta):
		return key_rate(s, MeasurementModel(eta), method, binning).key_rate

	if rate(1.0) <= 0:
		raise NeverSecure('Key rate is not positive even at eta_b = 1.')
	return find_boundary(rate, 0.0, 1.0, tol, decreasing=False)


def efficiency_reference(p, eta0):
	"""Dephasing reference curve eta0 / (1 - 2p + 2p^2)."""
	return eta0 / (1 - 2 * p + 2 * p ** 2)


def _noisy_state(kind, param, theta, side):
	ch = channels.make_channel(kind, param)
	return channels.apply_one_sided(ch, states.psi_theta(theta), side)


def critical_noise(kind, eta_b=1.0, method=BoundMethod.STEERING_ANALYTIC, binning=Binning.ASSIGN_ZERO,
				   tol=1e-4, theta=np.pi / 4, side=channels.Side.TRAVELING):
	"""Noise strength where the key rate, and separately S2 - 1/sqrt(2), reach zero."""
	kind = channels.NoiseKind(kind)
	lo, hi = channels.PARAM_RANGES[kind]
	m = MeasurementModel(eta_b)

	def rate(param):
		return key_rate(_noisy_state(kind, param, theta, side), m, method, binning).key_rate

	def steering(param):
		t = statistics(_noisy_state(kind, param, theta, side), m)
		return steering_s2(t, binning) - STEERING_BOUND

	if rate(lo) <= 0:
		raise NeverSecure('No positive key rate for {} even without noise at eta_b={}.'.format(kind.value, eta_b))
	key_root = find_boundary(rate, lo, hi, tol, decreasing=True)
	steer_root = find_boundary(steering, lo, hi, tol, decreasing=True)
	logger.info('%s at eta_b=%g: key-rate root %.5f, steering root %.5f', kind.value, eta_b, key_root, steer_root)
	return CriticalNoise(kind.value, float(eta_b), float(key_root), float(steer_root))


def esd_threshold(kind, tol=1e-4, theta=np.pi / 4, side=channels.Side.TRAVELING):
	"""First noise value with zero concurrence; the range end if there is none."""
	kind = channels.NoiseKind(kind)
	lo, hi = channels.PARAM_RANGES[kind]

	def conc(param):
		return states.concurrence(_noisy_state(kind, param, theta, side)) - 1e-12

	return find_boundary(conc, lo, hi, tol, decreasing=True)


def theta_min():
	"""Smallest theta with S2 = 1/sqrt(2) for the noise-free theta family at eta_b = 1."""
	return 0.5 * np.arcsin(np.sqrt(2) - 1)
