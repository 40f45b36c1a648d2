"""Deterministic CSV and manifest output.

Dialect: comma-separated, '.' decimal, '#'-prefixed metadata header
lines, LF endings, floats at 17 significant digits so values round-trip
bit-exactly and re-runs with identical configuration produce identical
bytes.
"""

import hashlib
import json
import math


def format_value(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


def write_csv(path, columns, rows, meta=None):
    """Write rows (iterable of sequences) with a '#' metadata header."""
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {_meta_repr(value)}\n")
    lines.append(",".join(columns) + "\n")
    for row in rows:
        lines.append(",".join(format_value(v) for v in row) + "\n")
    with open(path, "w", newline="") as fh:
        fh.writelines(lines)


def _meta_repr(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_meta_repr(v) for v in value) + "]"
    return json.dumps(value) if isinstance(value, str) else str(value)


def read_csv(path):
    """Read back a CSV written by :func:`write_csv`: (meta lines, columns, rows)."""
    meta = {}
    columns = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            if columns is None:
                columns = line.split(",")
                continue
            if line:
                rows.append([float(v) for v in line.split(",")])
    return meta, columns or [], rows


def write_json(path, payload):
    """Deterministic JSON: sorted keys, LF, floats via repr (shortest round trip)."""
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
