"""
Two-qubit states: the theta family, Bell states, Werner and Bell-diagonal
mixtures, fidelity and concurrence.

Bell basis order is (Phi+, Phi-, Psi+, Psi-) everywhere in the package.
"""

import logging
from dataclasses import dataclass

import numpy as np

from steerpy.errors import InvalidParameter, NotBellDiagonal
from steerpy.quantum import qmat

logger = logging.getLogger(__name__)

BELL_LABELS = ('phi_plus', 'phi_minus', 'psi_plus', 'psi_minus')

_s = 1 / np.sqrt(2)
BELL_VECTORS = np.array([[_s, 0, 0, _s],
						 [_s, 0, 0, -_s],
						 [0, _s, _s, 0],
						 [0, _s, -_s, 0]], dtype=complex)

SPIN_FLIP = qmat.tensor(qmat.Y, qmat.Y)

MIN_EIG_TOL = 1e-10
BELL_OFFDIAG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TwoQubitState:
	"""Validated, read-only 4x4 density matrix. Qubit 0 is Alice's."""
	rho: np.ndarray
	label: str = ''

	def __post_init__(self):
		rho = qmat.as_cmatrix(self.rho)
		if rho.shape != (4, 4):
			raise InvalidParameter('Two-qubit state needs a 4x4 matrix, got {}.'.format(rho.shape))
		if not qmat.is_hermitian(rho):
			raise InvalidParameter('Density matrix is not Hermitian.')
		tr = np.trace(rho)
		if abs(tr - 1) > qmat.STRUCTURAL_TOL:
			raise InvalidParameter('Density matrix has trace {}.'.format(tr))
		min_eig = qmat.eigvalsh(rho).min()
		if min_eig < -MIN_EIG_TOL:
			raise InvalidParameter('Density matrix has negative eigenvalue {:.3e}.'.format(min_eig))
		rho = rho.copy()
		rho.setflags(write=False)
		object.__setattr__(self, 'rho', rho)

	@classmethod
	def from_ket(cls, ket, label=''):
		return cls(qmat.projector(ket), label)

	def relabel(self, label):
		return TwoQubitState(self.rho, label)


@dataclass(frozen=True)
class BellDiagonal:
	weights: tuple

	def __post_init__(self):
		w = tuple(float(x) for x in self.weights)
		if len(w) != 4:
			raise InvalidParameter('Bell-diagonal state needs four weights.')
		if min(w) < 0:
			raise InvalidParameter('Bell weights must be nonnegative: {}.'.format(w))
		if abs(sum(w) - 1) > qmat.STRUCTURAL_TOL:
			raise InvalidParameter('Bell weights sum to {}.'.format(sum(w)))
		object.__setattr__(self, 'weights', w)

	@property
	def fidelity(self):
		return self.weights[0]


def psi_theta(theta):
	"""cos(theta)|00> + sin(theta)|11>."""
	if not 0 <= theta <= np.pi / 2:
		raise InvalidParameter('theta={} outside [0, pi/2].'.format(theta))
	ket = np.zeros(4, dtype=complex)
	ket[0] = np.cos(theta)
	ket[3] = np.sin(theta)
	return TwoQubitState.from_ket(ket, 'psi_theta({:.6g})'.format(theta))


def bell_state(label):
	if label not in BELL_LABELS:
		raise InvalidParameter('Unknown Bell state {!r}; choose from {}.'.format(label, BELL_LABELS))
	return TwoQubitState.from_ket(BELL_VECTORS[BELL_LABELS.index(label)], label)


def bell_diagonal_state(weights, label=''):
	w = BellDiagonal(weights).weights
	rho = sum(wi * qmat.projector(v) for wi, v in zip(w, BELL_VECTORS))
	return TwoQubitState(rho, label or 'bell_diagonal')


def werner_state(f):
	if not 0 <= f <= 1:
		raise InvalidParameter('Werner fidelity {} outside [0, 1].'.format(f))
	r = (1 - f) / 3
	return bell_diagonal_state((f, r, r, r), 'werner({:.6g})'.format(f))


def maximally_mixed():
	return TwoQubitState(np.eye(4, dtype=complex) / 4, 'maximally_mixed')


def fidelity_phi_plus(s):
	v = BELL_VECTORS[0]
	f = float(np.real(v.conj() @ s.rho @ v))
	return min(max(f, 0.0), 1.0)


def purity(s):
	return float(np.real(np.trace(s.rho @ s.rho)))


def bell_basis_matrix(s):
	"""rho expressed in the Bell basis."""
	return BELL_VECTORS.conj() @ s.rho @ BELL_VECTORS.T


def is_bell_diagonal(s, tol=BELL_OFFDIAG_TOL):
	m = bell_basis_matrix(s)
	off = m - np.diag(np.diag(m))
	return float(np.max(np.abs(off))) <= tol


def as_bell_diagonal(s, tol=BELL_OFFDIAG_TOL):
	m = bell_basis_matrix(s)
	off = float(np.max(np.abs(m - np.diag(np.diag(m)))))
	if off > tol:
		raise NotBellDiagonal('Bell-basis coherence {:.3e} exceeds {:.0e}; twirl first.'.format(off, tol))
	w = np.clip(np.real(np.diag(m)), 0.0, None)
	return BellDiagonal(tuple(w / w.sum()))


def is_werner(s, tol=BELL_OFFDIAG_TOL):
	if not is_bell_diagonal(s, tol):
		return False
	w = np.real(np.diag(bell_basis_matrix(s)))
	return float(np.ptp(w[1:])) <= tol


def swap_parties(s):
	return TwoQubitState(qmat.SWAP @ s.rho @ qmat.SWAP, s.label)


def pauli_expectation(s, a, b):
	"""<a (x) b> for single-qubit observables a on Alice and b on Bob."""
	return float(np.real(np.trace(qmat.tensor(a, b) @ s.rho)))


def spin_flip(s):
	return SPIN_FLIP @ s.rho.conj() @ SPIN_FLIP


def _concurrence_from_roots(roots):
	roots = np.sort(roots)[::-1]
	return float(max(0.0, roots[0] - roots[1:].sum()))


def concurrence(s):
	"""Wootters concurrence from the eigenvalues of rho * rho_tilde."""
	lam = qmat.eigvals_general(s.rho @ spin_flip(s))
	imag = float(np.max(np.abs(lam.imag)))
	if imag > qmat.SPECTRAL_TOL:
		logger.warning('rho*rho_tilde has eigenvalue imaginary part %.3e.', imag)
	lam = np.clip(lam.real, 0.0, None)
	# residue of exactly-zero eigenvalues
	lam[lam < 1e-13] = 0.0
	return _concurrence_from_roots(np.sqrt(lam))


def concurrence_via_sqrt(s):
	"""Same quantity from the singular values of sqrt(rho) sqrt(rho_tilde)."""
	r = qmat.hermitian_sqrt(s.rho)
	m = r @ spin_flip(s) @ r
	lam = np.clip(qmat.eigvalsh((m + qmat.dagger(m)) / 2), 0.0, None)
	lam[lam < 1e-13] = 0.0
	return _concurrence_from_roots(np.sqrt(lam))
