"""
CSV and JSON output.

Floats are written with repr so that repeated runs give byte-identical files
and parsed values equal the written ones. Booleans are written as true/false.
"""

import csv
import io
import json
import logging
import math
import os
import sys
from contextlib import contextmanager

logger = logging.getLogger(__name__)


def FormatValue(value):
	if isinstance(value, bool):
		return 'true' if value else 'false'
	if value is None:
		return ''
	if isinstance(value, float) or hasattr(value, 'dtype'):
		return repr(float(value))
	return str(value)


def ParseValue(text):
	if text == 'true':
		return True
	if text == 'false':
		return False
	if text == '':
		return None
	try:
		return int(text)
	except ValueError:
		pass
	try:
		return float(text)
	except ValueError:
		return text


def _jsonable(value):
	if isinstance(value, dict):
		return {k: _jsonable(v) for k, v in value.items()}
	if isinstance(value, (list, tuple)):
		return [_jsonable(v) for v in value]
	if isinstance(value, bool) or value is None or isinstance(value, str):
		return value
	if hasattr(value, 'dtype') or isinstance(value, (int, float)):
		value = value.item() if hasattr(value, 'item') else value
		if isinstance(value, float) and not math.isfinite(value):
			return None
		return value
	if hasattr(value, 'value'):
		return value.value
	return value


@contextmanager
def OpenOutput(out=None):
	"""Yield a text stream: stdout for None or '-', else the file at `out`."""
	if out is None or out == '-':
		yield sys.stdout
		return
	folder = os.path.dirname(os.path.abspath(out))
	if not os.path.isdir(folder):
		os.makedirs(folder)
		logger.info('Made directory {}.'.format(folder))
	with open(out, 'w', newline='') as f:
		yield f


def FormatCsv(rows, columns):
	buf = io.StringIO()
	w = csv.writer(buf, delimiter=',', lineterminator='\n')
	w.writerow(columns)
	for row in rows:
		w.writerow([FormatValue(row[c]) for c in columns])
	return buf.getvalue()


def FormatKeyValueCsv(meta):
	buf = io.StringIO()
	w = csv.writer(buf, delimiter=',', lineterminator='\n')
	for key, value in meta.items():
		w.writerow([key, FormatValue(value)])
	return buf.getvalue()


def FormatJson(obj):
	return json.dumps(_jsonable(obj), indent=2) + '\n'


def WriteCsv(rows, columns, out=None):
	with OpenOutput(out) as f:
		f.write(FormatCsv(rows, columns))


def WriteKeyValueCsv(meta, out=None):
	with OpenOutput(out) as f:
		f.write(FormatKeyValueCsv(meta))


def WriteJson(obj, out=None):
	with OpenOutput(out) as f:
		f.write(FormatJson(obj))


def ParseCsv(text):
	reader = csv.reader(io.StringIO(text))
	header = next(reader)
	return [dict(zip(header, (ParseValue(v) for v in row))) for row in reader]


def ParseKeyValueCsv(text):
	return {key: ParseValue(value) for key, value in csv.reader(io.StringIO(text))}
