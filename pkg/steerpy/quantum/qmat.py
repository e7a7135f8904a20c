"""
Small dense complex matrices for one to four qubits.

Matrices are plain complex128 numpy arrays. Qubit 0 is the leftmost factor of
a tensor product (most significant bit of the basis index).
"""

import logging
from functools import reduce

import numpy as np

from steerpy.errors import ConvergenceError, DimensionError, InvalidParameter

logger = logging.getLogger(__name__)

CMatrix = np.ndarray

MAX_QUBITS = 4
MAX_DIM = 2 ** MAX_QUBITS

# tolerance tiers
STRUCTURAL_TOL = 1e-12
SPECTRAL_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)

SWAP = np.array([[1, 0, 0, 0],
				 [0, 0, 1, 0],
				 [0, 1, 0, 0],
				 [0, 0, 0, 1]], dtype=complex)


def as_cmatrix(m):
	m = np.asarray(m, dtype=complex)
	if m.ndim != 2 or m.shape[0] != m.shape[1]:
		raise DimensionError('Expected a square matrix, got shape {}.'.format(m.shape))
	if m.shape[0] > MAX_DIM:
		raise DimensionError('Dimension {} exceeds the supported maximum {}.'.format(m.shape[0], MAX_DIM))
	return m


def num_qubits(m):
	dim = as_cmatrix(m).shape[0]
	n = int(round(np.log2(dim)))
	if 2 ** n != dim:
		raise DimensionError('Dimension {} is not a power of two.'.format(dim))
	return n


def projector(ket):
	ket = np.asarray(ket, dtype=complex)
	return np.outer(ket, ket.conj())


def dagger(m):
	return np.conj(m).T


def is_hermitian(m, tol=STRUCTURAL_TOL):
	m = as_cmatrix(m)
	return float(np.max(np.abs(m - dagger(m)))) <= tol


def tensor(*ms):
	"""Kronecker product of the given matrices, left to right."""
	if not ms:
		raise InvalidParameter('tensor needs at least one factor.')
	dim = int(np.prod([np.shape(m)[0] for m in ms]))
	if dim > MAX_DIM:
		raise DimensionError('Tensor product of dimension {} exceeds {}.'.format(dim, MAX_DIM))
	return reduce(np.kron, [as_cmatrix(m) for m in ms])


def embed(op, qubit, n):
	"""Single-qubit operator acting on `qubit` of an n-qubit register."""
	if not 0 <= qubit < n:
		raise InvalidParameter('Qubit {} outside a {}-qubit register.'.format(qubit, n))
	factors = [I2] * n
	factors[qubit] = op
	return tensor(*factors)


def cnot(control, target, n):
	if control == target:
		raise InvalidParameter('CNOT control and target must differ.')
	p0 = projector(KET0)
	p1 = projector(KET1)
	return embed(p0, control, n) + embed(p1, control, n) @ embed(X, target, n)


def partial_trace(m, keep):
	"""
	Trace out every qubit not listed in `keep`.

	The kept qubits stay in ascending order. keep=[] returns the 1x1 trace.
	"""
	m = as_cmatrix(m)
	n = num_qubits(m)
	keep = list(keep)
	if len(set(keep)) != len(keep) or any((not isinstance(k, (int, np.integer))) or k < 0 or k >= n for k in keep):
		raise InvalidParameter('Invalid subsystem indices {} for {} qubits.'.format(keep, n))
	traced = [q for q in range(n) if q not in keep]

	t = m.reshape([2] * (2 * n))
	# highest index first so the remaining axis numbers stay valid
	for q in reversed(traced):
		t = np.trace(t, axis1=q, axis2=q + t.ndim // 2)
	d = 2 ** len(keep)
	return t.reshape(d, d)


def eigvals_general(m):
	"""All eigenvalues of a (possibly non-Hermitian) matrix."""
	m = as_cmatrix(m)
	try:
		return np.linalg.eigvals(m)
	except np.linalg.LinAlgError as e:
		raise ConvergenceError('Eigenvalue iteration did not converge: {}'.format(e))


def eigvalsh(m):
	m = as_cmatrix(m)
	try:
		return np.linalg.eigvalsh(m)
	except np.linalg.LinAlgError as e:
		raise ConvergenceError('Hermitian eigensolver did not converge: {}'.format(e))


def hermitian_sqrt(m, clamp_tol=1e-10, reject_tol=1e-8):
	"""
	Principal square root of a Hermitian PSD matrix.

	Eigenvalues in [-clamp_tol, 0) are treated as zero; anything below
	-reject_tol means the input was not a valid state.
	"""
	m = as_cmatrix(m)
	if not is_hermitian(m, SPECTRAL_TOL):
		raise InvalidParameter('hermitian_sqrt needs a Hermitian matrix.')
	m = (m + dagger(m)) / 2
	try:
		w, v = np.linalg.eigh(m)
	except np.linalg.LinAlgError as e:
		raise ConvergenceError('Hermitian eigensolver did not converge: {}'.format(e))
	if w.min() < -reject_tol:
		raise InvalidParameter('Matrix has a negative eigenvalue {:.3e}.'.format(w.min()))
	if w.min() < -clamp_tol:
		logger.warning('Clamping eigenvalue %.3e to zero in hermitian_sqrt.', w.min())
	w = np.clip(w, 0.0, None)
	return (v * np.sqrt(w)) @ dagger(v)


def random_density_matrix(d, rng):
	"""Random full-rank density matrix from a complex Ginibre sample."""
	g = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
	rho = g @ dagger(g)
	rho = (rho + dagger(rho)) / 2
	return rho / np.trace(rho).real
