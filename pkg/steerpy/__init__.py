"""
steerpy: noise analysis of one-sided device-independent QKD.
Secure key-rate bounds from steering, noise and efficiency thresholds,
entanglement sudden death, and BBPSSW purification with pair-overhead accounting.

'steerpy' is the main console.
Scenarios are loaded from a yaml (or json) config file and merged with command line flags.

Usage:
steerpy keyrate --config ./configs/config_dephasing_30km.yaml
steerpy sweep noise --noise depolarizing --eta 1.0
"""

class SteerpyParams():
	# Scenario defaults
	theta = 0.7853981633974483 # pi/4, maximally entangled
	etaB = 1.0
	side = 'traveling'
	binning = 'assign_zero'
	bound = 'steering_analytic'

	# Sweep parameters
	etaRange = (0.4, 1.0)
	etaPoints = 100
	noiseStep = 0.01
	thetaPoints = 100
	searchTol = 1e-4

	# Fibre parameters (km)
	coherenceKm = {'dephasing': 40.0, 'amplitude_damping': 24.0, 'depolarizing': 40.0}
	referenceKm = 30.0

	# Purification parameters
	rounds = 6
	maxRounds = 12
	twirlEachRound = True

	# Contour parameters
	lMaxKm = 60.0
	lStepKm = 1.0
	contourRounds = 10
	workers = 1
