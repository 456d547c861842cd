"""CSV and JSON serialization of bench records."""
import csv
import io
import json
import math
from dataclasses import asdict, fields

from .runner import BenchRecord

CSV_HEADER = ["problem_id", "algorithm_id", "seed", "d", "target_acc", "oracle_calls",
              "wall_time_s", "final_gap", "status"]
_FLOAT_FIELDS = {"target_acc", "oracle_calls", "wall_time_s", "final_gap"}
_INT_FIELDS = {"seed", "d"}


def format_float(x):
    """17 significant digits; non-finite values as ``inf``, ``-inf``, ``nan``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _row(rec):
    vals = asdict(rec)
    out = []
    for key in CSV_HEADER:
        v = vals[key]
        if key in _FLOAT_FIELDS:
            out.append(format_float(v))
        elif key in _INT_FIELDS:
            out.append(str(int(v)))
        else:
            out.append(str(v))
    return out


def to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(_row(rec))
    return buf.getvalue()


def _encode(v):
    if isinstance(v, float) and not math.isfinite(v):
        return format_float(v)
    return v


def to_json(records):
    rows = [{k: _encode(v) for k, v in asdict(r).items()} for r in records]
    return json.dumps(rows, indent=1) + "\n"


def emit(records, fmt, path):
    """Write ``records`` to ``path`` as ``csv`` or ``json`` (UTF-8, LF)."""
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "json":
        text = to_json(records)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _decode(key, v):
    if key in _FLOAT_FIELDS:
        return float(v)
    if key in _INT_FIELDS:
        return int(v)
    return v


def from_rows(rows):
    names = [f.name for f in fields(BenchRecord)]
    return [BenchRecord(**{k: _decode(k, row[k]) for k in names}) for row in rows]


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return from_rows(list(csv.DictReader(fh)))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return from_rows(json.load(fh))
