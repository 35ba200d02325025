"""CSV helpers and the flat key-value config format."""
from __future__ import annotations

import csv
import hashlib
import os

import numpy as np



def fmt(v):
    """Shortest round-trip decimal representation of a binary64 value."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def write_csv(path, header, rows, comments=()):
    """Write ``rows`` under a mandatory ``header``, preceded by ``# `` comment lines."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_columns(path, columns, comments=()):
    """Write a dict of equal-length 1-D arrays as CSV columns."""
    header = list(columns)
    data = [np.asarray(columns[k]) for k in header]
    n = len(data[0]) if data else 0
    if any(len(d) != n for d in data):
        raise ValueError("columns must have equal length")
    write_csv(path, header, zip(*data), comments)


def read_csv(path):
    """Return (header, float array) skipping comment lines."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    reader = csv.reader(lines)
    header = next(reader)
    rows = [[float(v) if v != "" else np.nan for v in r] for r in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def read_vector(path):
    """Single-column CSV as a 1-D array."""
    _, data = read_csv(path)
    return data[:, 0]


def parse_config_text(text):
    """Parse ``key = value`` lines; '#' starts a comment.  Keys may be dotted."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ValueError(f"line {lineno}: empty key")
        out[k] = v
    return out


def config_hash(mapping):
    blob = "\n".join(f"{k}={mapping[k]}" for k in sorted(mapping))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
