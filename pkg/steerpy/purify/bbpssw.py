"""
BBPSSW recurrence purification.

Two copies of a pair are held as a 4-qubit register in the order
(A1, B1, A2, B2). Pair 1 is kept, pair 2 is the target of the bilateral
CNOTs and is measured in the computational basis. The closed-form
recurrences below are the oracle for the circuit simulation.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from steerpy import SteerpyParams
from steerpy.errors import InvalidParameter, ZeroSuccessProbability
from steerpy.protocol.keyrate import SecurityConfig
from steerpy.quantum import qmat, states

logger = logging.getLogger(__name__)

MAX_ROUNDS = SteerpyParams.maxRounds
MIN_SUCCESS = 1e-14

_TWIRL_OPS = tuple(qmat.tensor(p, p) for p in qmat.PAULIS)
_BILATERAL_CNOT = qmat.cnot(1, 3, 4) @ qmat.cnot(0, 2, 4)
_P0, _P1 = qmat.projector(qmat.KET0), qmat.projector(qmat.KET1)
_KEEP_EQUAL = qmat.tensor(qmat.I2, qmat.I2, _P0, _P0) + qmat.tensor(qmat.I2, qmat.I2, _P1, _P1)


@dataclass(frozen=True)
class PurificationRound:
	n: int
	fidelity: float
	success_prob: float
	cumulative_yield: float
	key_rate: float
	effective_rate: float
	concurrence: float = 0.0
	s2: float = 0.0

	def to_dict(self):
		return asdict(self)

	@classmethod
	def from_dict(cls, d):
		return cls(**d)


@dataclass(frozen=True)
class PurificationTrace:
	rounds: tuple = field(default_factory=tuple)
	diverged: bool = False
	label: str = ''

	def __len__(self):
		return len(self.rounds)

	@property
	def fidelities(self):
		return [r.fidelity for r in self.rounds]

	@property
	def effective_rates(self):
		return [r.effective_rate for r in self.rounds]

	def to_dict(self):
		return {'label': self.label, 'diverged': self.diverged, 'rounds': [r.to_dict() for r in self.rounds]}

	@classmethod
	def from_dict(cls, d):
		return cls(tuple(PurificationRound.from_dict(r) for r in d['rounds']), bool(d.get('diverged', False)),
				   d.get('label', ''))


def pauli_twirl(s):
	"""1/4 sum_i (s_i (x) s_i) rho (s_i (x) s_i); the result is Bell-diagonal."""
	rho = sum(op @ s.rho @ op for op in _TWIRL_OPS) / 4
	return states.TwoQubitState((rho + qmat.dagger(rho)) / 2, s.label)


def werner_twirl(s):
	"""Random bilateral U (x) U* rotation: the Werner state with the same Phi+ fidelity."""
	return states.werner_state(states.fidelity_phi_plus(s)).relabel(s.label)


def bbpssw_recurrence(f):
	if not 0 <= f <= 1:
		raise InvalidParameter('Fidelity {} outside [0, 1].'.format(f))
	g = 1 - f
	p_succ = f ** 2 + 2 * f * g / 3 + 5 * g ** 2 / 9
	return (f ** 2 + g ** 2 / 9) / p_succ, p_succ


def bell_diagonal_recurrence(weights):
	"""Bilateral-CNOT map on Bell weights (Phi+, Phi-, Psi+, Psi-), without twirling."""
	a, b, c, d = states.BellDiagonal(weights).weights
	p_succ = (a + b) ** 2 + (c + d) ** 2
	out = (a ** 2 + b ** 2, 2 * a * b, c ** 2 + d ** 2, 2 * c * d)
	return tuple(w / p_succ for w in out), p_succ


def iterate_recurrence(f0, n):
	"""[F_0, F_1, ..., F_n] under the Werner recurrence."""
	fs = [float(f0)]
	for _ in range(n):
		fs.append(bbpssw_recurrence(fs[-1])[0])
	return fs


def bbpssw_exact(s):
	"""One round on two copies of `s`; returns the kept pair and the success probability."""
	rho = qmat.tensor(s.rho, s.rho)
	rho = _BILATERAL_CNOT @ rho @ qmat.dagger(_BILATERAL_CNOT)
	kept = _KEEP_EQUAL @ rho @ _KEEP_EQUAL
	p_succ = float(np.real(np.trace(kept)))
	if p_succ < MIN_SUCCESS:
		raise ZeroSuccessProbability('Kept branch has probability {:.3e}.'.format(p_succ))
	out = qmat.partial_trace(kept, [0, 1]) / p_succ
	out = (out + qmat.dagger(out)) / 2
	return states.TwoQubitState(out, s.label), p_succ


def _record(n, s, p_succ, cumulative_yield, security):
	report = security.evaluate(s)
	return PurificationRound(
		n=n,
		fidelity=states.fidelity_phi_plus(s),
		success_prob=float(p_succ),
		cumulative_yield=float(cumulative_yield),
		key_rate=report.key_rate,
		effective_rate=report.clamped_rate * cumulative_yield,
		concurrence=report.concurrence,
		s2=report.s2,
	)


def purify_iterate(s, n_rounds, twirl_each_round=True, security=None):
	"""
	Run n_rounds of BBPSSW on `s`.

	Round 0 is the raw input. Before each later round the current pair is
	Werner-twirled when twirl_each_round is set, otherwise Pauli-twirled only
	if it has Bell-basis coherences. Key rates use `security`.
	"""
	if not 0 <= n_rounds <= MAX_ROUNDS:
		raise InvalidParameter('n_rounds={} outside [0, {}].'.format(n_rounds, MAX_ROUNDS))
	security = security or SecurityConfig()

	rounds = [_record(0, s, 1.0, 1.0, security)]
	diverged = rounds[0].fidelity <= 0.5
	if diverged:
		logger.warning('Input fidelity %.4f <= 1/2; purification cannot converge.', rounds[0].fidelity)

	current = s
	cumulative_yield = 1.0
	for n in range(1, n_rounds + 1):
		if twirl_each_round:
			current = werner_twirl(current)
		elif not states.is_bell_diagonal(current):
			current = pauli_twirl(current)
		current, p_succ = bbpssw_exact(current)
		cumulative_yield *= p_succ / 2
		rounds.append(_record(n, current, p_succ, cumulative_yield, security))
		logger.debug('round %d: F=%.6f P=%.6f yield=%.3e', n, rounds[-1].fidelity, p_succ, cumulative_yield)

	return PurificationTrace(tuple(rounds), diverged, s.label)


def effective_rate_curve(trace):
	"""(round with the highest effective rate, effective rate per round); ties go to the earlier round."""
	if not len(trace):
		raise InvalidParameter('Empty purification trace.')
	curve = trace.effective_rates
	return int(np.argmax(curve)), curve
