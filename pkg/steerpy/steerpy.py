"""
steerpy command line.

Subcommands evaluate one scenario (keyrate, threshold, esd, purify) or many
(sweep, contour, table). A scenario comes from an optional --config yaml/json
file; command line flags override its values. Results go to stdout or --out,
as csv or json. Logging goes to stderr.

Usage:
steerpy keyrate --noise dephasing --param 0.0 --eta 1.0 --theta 0.7854
steerpy purify --noise amplitude_damping --length-km 30 --lc-km 24 --rounds 6 --eta 0.9
steerpy threshold noise --noise depolarizing --eta 1.0 --steering-only
"""

import argparse
from dataclasses import fields
import logging
import sys

import yaml

from steerpy import SteerpyParams
from steerpy.errors import DomainError, InvalidParameter
from steerpy.experiments import sweeps, tables
from steerpy.experiments.scenario import LoadConfig, Scenario
from steerpy.protocol import keyrate
from steerpy.protocol.search import find_boundary
from steerpy.purify import bbpssw
from steerpy.quantum import channels
from steerpy.utils import validate
from steerpy.writer import report

logger = logging.getLogger(__name__)

NOISE_CHOICES = [k.value for k in channels.NoiseKind if k != channels.NoiseKind.COMPOSITE]


def AddScenarioArgs(parser):
	parser.add_argument(
		"--config",
		dest="config",
		help="Scenario configuration .yaml or .json file.",
	)
	parser.add_argument(
		"--noise",
		dest="noise",
		action="append",
		choices=NOISE_CHOICES,
		help="Noise channel. Repeat to compose channels in the given order.",
	)
	parser.add_argument(
		"--param",
		dest="param",
		action="append",
		type=float,
		help="Noise strength (p, q or gamma) for each --noise, in order.",
	)
	parser.add_argument(
		"--length-km",
		dest="length_km",
		type=float,
		help="Fibre length in km; sets the noise strength from the distance map.",
	)
	parser.add_argument(
		"--lc-km",
		dest="lc_km",
		type=float,
		help="Coherence length in km (default 40 for dephasing/depolarizing, 24 for amplitude damping).",
	)
	parser.add_argument(
		"--side",
		dest="side",
		choices=[s.value for s in channels.Side],
		help="Which qubit goes through the noise.",
	)
	parser.add_argument(
		"--eta",
		dest="eta_b",
		type=float,
		help="Bob's detection efficiency.",
	)
	parser.add_argument(
		"--theta",
		dest="theta",
		type=float,
		help="Entanglement angle in radians.",
	)
	parser.add_argument(
		"--binning",
		dest="binning",
		choices=[b.value for b in keyrate.Binning],
		help="Treatment of Bob's no-click outcome.",
	)
	parser.add_argument(
		"--bound",
		dest="bound",
		choices=[b.value for b in keyrate.BoundMethod],
		help="Lower bound used for H(A1|E).",
	)
	parser.add_argument(
		"--rounds",
		dest="rounds",
		type=int,
		help="Purification rounds.",
	)
	parser.add_argument(
		"--no-twirl-each-round",
		dest="twirl_each_round",
		action="store_false",
		default=None,
		help="Only Pauli-twirl when the state has Bell-basis coherences.",
	)


def AddOutputArgs(parser):
	parser.add_argument(
		"--format",
		dest="format",
		choices=["csv", "json"],
		help="Output format.",
	)
	parser.add_argument(
		"--out",
		dest="out",
		help="Output file (default: stdout).",
	)
	parser.add_argument(
		"--log-level",
		dest="log_level",
		default="WARNING",
		choices=["DEBUG", "INFO", "WARNING", "ERROR"],
		help="Logging level on stderr.",
	)


def AddSweepArgs(parser):
	parser.add_argument(
		"--points",
		dest="points",
		type=int,
		help="Number of grid points.",
	)
	parser.add_argument(
		"--step",
		dest="step",
		type=float,
		default=SteerpyParams.noiseStep,
		help="Noise grid step.",
	)
	parser.add_argument(
		"--eta-min",
		dest="eta_min",
		type=float,
		default=SteerpyParams.etaRange[0],
		help="Lower end of the efficiency sweep.",
	)
	parser.add_argument(
		"--eta-max",
		dest="eta_max",
		type=float,
		default=SteerpyParams.etaRange[1],
		help="Upper end of the efficiency sweep.",
	)


def AddContourArgs(parser):
	parser.add_argument(
		"--l-max",
		dest="l_max",
		type=float,
		default=SteerpyParams.lMaxKm,
		help="Longest fibre length in km.",
	)
	parser.add_argument(
		"--l-step",
		dest="l_step",
		type=float,
		default=SteerpyParams.lStepKm,
		help="Fibre length step in km.",
	)
	parser.add_argument(
		"--max-rounds",
		dest="max_rounds",
		type=int,
		help="Last purification round.",
	)
	parser.add_argument(
		"--workers",
		dest="workers",
		type=int,
		default=SteerpyParams.workers,
		help="Worker processes for grid cells.",
	)


def ParseClargs(parser, argv=None):
	sub = parser.add_subparsers(dest="command", metavar="command")
	sub.required = True

	p = sub.add_parser("keyrate", help="Key-rate report for one scenario.")
	AddScenarioArgs(p)
	AddOutputArgs(p)

	p = sub.add_parser("threshold", help="Efficiency or noise threshold.")
	p.add_argument("target", choices=["eta", "noise"])
	p.add_argument(
		"--steering-only",
		dest="steering_only",
		action="store_true",
		help="Report only the S2 = 1/sqrt(2) threshold.",
	)
	AddScenarioArgs(p)
	AddOutputArgs(p)

	p = sub.add_parser("esd", help="Noise strength where concurrence first vanishes.")
	p.add_argument("kind", choices=[k.value for k in channels.NOISE_KINDS])
	AddScenarioArgs(p)
	AddOutputArgs(p)

	p = sub.add_parser("purify", help="BBPSSW purification trace.")
	AddScenarioArgs(p)
	AddOutputArgs(p)

	p = sub.add_parser("sweep", help="Key rate along one axis.")
	p.add_argument("axis", choices=["eta", "noise", "theta"])
	AddScenarioArgs(p)
	AddSweepArgs(p)
	AddOutputArgs(p)

	p = sub.add_parser("contour", help="Key rate over fibre length and purification round.")
	AddScenarioArgs(p)
	AddContourArgs(p)
	AddOutputArgs(p)

	p = sub.add_parser("table", help="Threshold or purification-strategy table.")
	p.add_argument("which", nargs="?", default="thresholds", choices=["thresholds", "strategy"])
	AddScenarioArgs(p)
	AddContourArgs(p)
	AddOutputArgs(p)

	p = sub.add_parser("validate", help="Run the invariant suite.")
	AddOutputArgs(p)

	return parser.parse_args(argv)


SPAN_COMMANDS = ("contour", "table")


def ScansNoiseStrength(clargs):
	"""Commands that pick the noise strength themselves."""
	return (clargs.command in SPAN_COMMANDS + ("esd",) or getattr(clargs, "target", None) == "noise"
			or getattr(clargs, "axis", None) == "noise")


def NoiseFromClargs(clargs, config_noise=()):
	"""
	Noise stages for the scenario. With --noise they are built from the flags;
	without it --param, --length-km and --lc-km apply to the config's stages.
	"""
	values = clargs.param or []
	length_km = clargs.length_km
	# contour and table read --lc-km themselves
	lc_km = None if clargs.command in SPAN_COMMANDS else clargs.lc_km
	if (values or length_km is not None) and ScansNoiseStrength(clargs):
		raise InvalidParameter('--param and --length-km do not apply to {}, which scans the noise strength.'.format(
			clargs.command))
	if values and length_km is not None:
		raise InvalidParameter('Give either --param or --length-km, not both.')

	if clargs.noise:
		stages = [{'kind': kind} for kind in clargs.noise]
	else:
		if isinstance(config_noise, dict):
			config_noise = [config_noise]
		if not isinstance(config_noise or (), (list, tuple)):
			raise InvalidParameter('noise must be a list of stages, got {!r}.'.format(config_noise))
		stages =[dict(st) if isinstance(st, dict) else st for st in config_noise or ()]
		if not stages and (values or length_km is not None or lc_km is not None):
			raise InvalidParameter('--param, --length-km and --lc-km need a --noise channel or noise in the config.')
	if values and len(values) != len(stages):
		raise InvalidParameter('Got {} --param values for {} noise channels.'.format(len(values), len(stages)))

	for i, stage in enumerate(stages):
		if not isinstance(stage, dict):
			continue
		if values:
			stage.pop('length_km', None)
			stage.pop('lc_km', None)
			stage['param'] = values[i]
		elif length_km is not None:
			stage.pop('param', None)
			stage['length_km'] = length_km
	if lc_km is not None:
		by_distance = [st for st in stages if isinstance(st, dict) and 'length_km' in st]
		if not by_distance:
			raise InvalidParameter('--lc-km needs --length-km or a noise stage given by length.')
		for stage in by_distance:
			stage['lc_km'] = lc_km
	return stages


def CombineConfigAndClargs(clargs):
	params = {}
	if getattr(clargs, "config", None):
		params = dict(LoadConfig(clargs.config))
	params["noise"] = NoiseFromClargs(clargs, params.get("noise", ()))
	for key in ("theta", "side", "eta_b", "binning", "bound", "rounds", "twirl_each_round"):
		value = getattr(clargs, key, None)
		if value is not None:
			params[key] = value
	return Scenario.from_dict(params)


def SingleKind(clargs, scenario):
	"""The one channel kind a threshold/sweep/contour runs over."""
	if getattr(clargs, "noise", None):
		if len(clargs.noise) != 1:
			raise InvalidParameter('This command takes exactly one --noise channel.')
		return clargs.noise[0]
	if len(scenario.noise) == 1:
		return scenario.noise[0].kind
	raise InvalidParameter('This command needs one --noise channel.')


def Emit(clargs, default_format, rows=None, columns=None, obj=None):
	fmt = clargs.format or default_format
	if fmt == "csv":
		if rows is None:
			report.WriteKeyValueCsv(obj, clargs.out)
		else:
			report.WriteCsv(rows, columns, clargs.out)
	else:
		report.WriteJson(obj if obj is not None else {"rows": list(rows)}, clargs.out)


def RunKeyrate(clargs, scenario):
	rep = scenario.security.evaluate(scenario.state())
	Emit(clargs, "json", obj=rep.to_dict())
	return 0


def RunThreshold(clargs, scenario):
	if clargs.target == "eta":
		eta_min = keyrate.min_efficiency(scenario.state(), scenario.bound, scenario.binning)
		out = {"threshold": "eta_b", "eta_min": eta_min, "scenario": scenario.to_dict()}
		if scenario.noise_kind == channels.NoiseKind.DEPHASING.value:
			eta0 = keyrate.min_efficiency(scenario.replace(noise=[]).state(), scenario.bound, scenario.binning)
			out["reference_eta"] = keyrate.efficiency_reference(scenario.noise_param, eta0)
		Emit(clargs, "json", obj=out)
		return 0

	kind = SingleKind(clargs, scenario)
	if clargs.steering_only:
		m = keyrate.MeasurementModel(scenario.eta_b)

		def steering(param):
			s = channels.apply_one_sided(channels.make_channel(kind, param),
										 scenario.replace(noise=[]).state(), scenario.side)
			return keyrate.steering_s2(keyrate.statistics(s, m), scenario.binning) - keyrate.STEERING_BOUND

		lo, hi = channels.PARAM_RANGES[channels.NoiseKind(kind)]
		root = find_boundary(steering, lo, hi, SteerpyParams.searchTol, decreasing=True)
		out = {"noise_kind": kind, "eta_b": scenario.eta_b, "steering_root": root}
	else:
		crit = keyrate.critical_noise(kind, scenario.eta_b, scenario.bound, scenario.binning,
									  theta=scenario.theta, side=scenario.side)
		out = {"noise_kind": crit.kind, "eta_b": crit.eta_b, "steering_root": crit.steering_root,
			   "key_rate_root": crit.key_rate_root}
	Emit(clargs, "json", obj=out)
	return 0


def RunEsd(clargs, scenario):
	value = keyrate.esd_threshold(clargs.kind, theta=scenario.theta, side=scenario.side)
	Emit(clargs, "json", obj={"noise_kind": clargs.kind, "esd": value})
	return 0


def RunPurify(clargs, scenario):
	trace = bbpssw.purify_iterate(scenario.state(), scenario.rounds, scenario.twirl_each_round,
								  scenario.security)
	best, _ = bbpssw.effective_rate_curve(trace)
	if (clargs.format or "csv") == "csv":
		report.WriteCsv(sweeps.trace_rows(trace), sweeps.TRACE_COLUMNS, clargs.out)
	else:
		obj = trace.to_dict()
		obj["best_round"] = best
		report.WriteJson(obj, clargs.out)
	return 0


def RunSweep(clargs, scenario):
	if clargs.axis == "eta":
		res = sweeps.sweep_efficiency(scenario, clargs.points or SteerpyParams.etaPoints,
									  (clargs.eta_min, clargs.eta_max))
	elif clargs.axis == "noise":
		res = sweeps.sweep_noise(SingleKind(clargs, scenario), scenario.eta_b, clargs.points, clargs.step,
								 base=scenario)
	else:
		res = sweeps.sweep_theta(scenario.eta_b, clargs.points or SteerpyParams.thetaPoints,
								 base=scenario)
	if (clargs.format or "csv") == "csv":
		report.WriteCsv(res.rows, res.columns, clargs.out)
	else:
		report.WriteJson(res.to_dict(), clargs.out)
	for c in res.crossings:
		logger.info('%s crosses zero along %s at %.6f (refined %s)', c.quantity, c.axis, c.interpolated, c.refined)
	return 0


def RunContour(clargs, scenario):
	kind = SingleKind(clargs, scenario)
	max_rounds = clargs.max_rounds if clargs.max_rounds is not None else SteerpyParams.contourRounds
	res = sweeps.contour_grid(kind, clargs.lc_km, (0.0, clargs.l_max), clargs.l_step, (0, max_rounds),
							  scenario.eta_b, scenario.security, scenario.twirl_each_round, clargs.workers)
	if (clargs.format or "csv") == "csv":
		report.WriteCsv(res.rows, res.columns, clargs.out)
	else:
		obj = res.to_dict()
		obj["secure_cells_per_round"] = sweeps.secure_cells_per_round(res)
		report.WriteJson(obj, clargs.out)
	return 0


def RunTable(clargs, scenario):
	if clargs.which == "thresholds":
		tab = tables.threshold_table(scenario.eta_b, scenario.bound, scenario.binning)
		rows, columns, obj = [r.to_dict() for r in tab.rows], [f.name for f in fields(tables.ThresholdRow)], tab.to_dict()
	else:
		kind = SingleKind(clargs, scenario)
		max_rounds = clargs.max_rounds if clargs.max_rounds is not None else SteerpyParams.maxRounds
		found = tables.strategy_table(kind, eta_b=scenario.eta_b, lc_km=clargs.lc_km, max_rounds=max_rounds,
									  twirl_each_round=scenario.twirl_each_round)
		rows, columns = [r.to_dict() for r in found], [f.name for f in fields(tables.StrategyRow)]
		obj = {"rows": rows}
	if (clargs.format or "json") == "csv":
		report.WriteCsv(rows, tuple(columns), clargs.out)
	else:
		report.WriteJson(obj, clargs.out)
	return 0


def RunValidate(clargs):
	results = validate.RunValidation()
	if (clargs.format or "json") == "csv":
		report.WriteCsv(results, ("check", "passed", "detail"), clargs.out)
	else:
		report.WriteJson({"passed": all(r["passed"] for r in results), "checks": results}, clargs.out)
	return 0 if all(r["passed"] for r in results) else 1


COMMANDS = {
	"keyrate": RunKeyrate,
	"threshold": RunThreshold,
	"esd": RunEsd,
	"purify": RunPurify,
	"sweep": RunSweep,
	"contour": RunContour,
	"table": RunTable,
}


def Main(argv=None):
	parser = argparse.ArgumentParser(
		prog="steerpy", description="steerpy CLI", formatter_class=argparse.ArgumentDefaultsHelpFormatter,
		)
	try:
		clargs = ParseClargs(parser, argv)
	except SystemExit as e:
		return e.code if isinstance(e.code, int) else 2

	logging.basicConfig(
		level=getattr(logging, clargs.log_level),
		format="%(asctime)s %(name)s %(levelname)s: %(message)s",
		stream=sys.stderr,
	)

	try:
		if clargs.command == "validate":
			return RunValidate(clargs)
		scenario = CombineConfigAndClargs(clargs)
		return COMMANDS[clargs.command](clargs, scenario)
	except DomainError as e:
		logging.error('Caught exception: {}'.format(e))
		report.WriteJson({"error": type(e).__name__, "message": str(e)})
		return 1
	except (ValueError, OSError, yaml.YAMLError) as e:
		logging.error('Caught exception: {}'.format(e))
		return 2


if __name__ == "__main__":
	sys.exit(Main())
