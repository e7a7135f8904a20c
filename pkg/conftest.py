import numpy as np
import pytest

from steerpy.quantum import channels, states


@pytest.fixture
def rng():
	return np.random.default_rng(1234)


@pytest.fixture
def phi_plus():
	return states.bell_state('phi_plus')


@pytest.fixture
def noisy_phi_plus(phi_plus):
	def _make(kind, param, side=channels.Side.TRAVELING):
		return channels.apply_one_sided(channels.make_channel(kind, param), phi_plus, side)
	return _make
