"""
Bisection for the sign boundary of a monotone function.
"""

import logging

from steerpy.errors import InvalidParameter, SearchError

logger = logging.getLogger(__name__)

MAX_ITER = 200
# slack on the clamped values when checking monotonicity
MONOTONE_SLACK = 1e-9


def _check_order(f_lo, f_mid, f_hi, decreasing, where):
	lo_c, mid_c, hi_c = max(f_lo, 0.0), max(f_mid, 0.0), max(f_hi, 0.0)
	if decreasing:
		ok = lo_c + MONOTONE_SLACK >= mid_c and mid_c + MONOTONE_SLACK >= hi_c
	else:
		ok = lo_c <= mid_c + MONOTONE_SLACK and mid_c <= hi_c + MONOTONE_SLACK
	if not ok:
		raise SearchError('Function is not monotone on the bracket around {:.6g}: {:.6g}, {:.6g}, {:.6g}.'.format(
			where, f_lo, f_mid, f_hi))


def find_boundary(func, lo, hi, tol=1e-4, decreasing=True):
	"""
	Locate where func stops (decreasing) or starts (increasing) being positive.

	The clamped value max(func, 0) must be monotone on [lo, hi]; that is checked
	at every step. Returns the midpoint of the final bracket. If func never
	changes sign the nearer endpoint is returned: lo when it is not positive at
	the "positive" end, hi when it is positive across the whole range.
	"""
	if not lo < hi:
		raise InvalidParameter('Empty bracket [{}, {}].'.format(lo, hi))
	if tol <= 0:
		raise InvalidParameter('Tolerance must be positive.')

	f_lo, f_hi = func(lo), func(hi)
	pos_end, neg_end = (f_lo, f_hi) if decreasing else (f_hi, f_lo)
	if pos_end <= 0:
		return lo if decreasing else hi
	if neg_end > 0:
		logger.info('Function stays positive on [%g, %g].', lo, hi)
		return hi if decreasing else lo

	for _ in range(MAX_ITER):
		if hi - lo <= tol:
			break
		mid = (lo + hi) / 2
		f_mid = func(mid)
		_check_order(f_lo, f_mid, f_hi, decreasing, mid)
		if (f_mid > 0) == decreasing:
			lo, f_lo = mid, f_mid
		else:
			hi, f_hi = mid, f_mid
	else:
		logger.warning('Bisection stopped after %d iterations at width %g.', MAX_ITER, hi - lo)
	return (lo + hi) / 2
