"""JSON and CSV serialization of signals, fields, coefficients, operators and reports.

JSON output is deterministic: sorted keys and Python ``repr`` floats, so equal
inputs give byte-identical files.
"""

import csv
import json
import math
import os

import numpy as np

from ._validation import TFLabError
from .grid import GridSpec, PhaseSpaceField, SampledSignal
from .ops import OperatorMatrix


def _clean(obj):
    """Convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        if math.isnan(val):
            return "nan"
        if math.isinf(val):
            return "inf" if val > 0 else "-inf"
        return val
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=1) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise TFLabError(f"cannot read {path}: {exc}") from exc


def _grid_of(data):
    try:
        return GridSpec(int(data["n"]), float(data["L"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise TFLabError(f"missing or bad grid metadata: {exc}") from exc


# signals


def signal_to_dict(f):
    return {"n": f.grid.n, "L": f.grid.L, "re": f.samples.real, "im": f.samples.imag}


def signal_from_dict(data):
    grid = _grid_of(data)
    return SampledSignal(grid, np.asarray(data["re"], float) + 1j * np.asarray(data["im"], float))


def save_signal(path, f):
    write_json(path, signal_to_dict(f))


def load_signal(path):
    return signal_from_dict(read_json(path))


def write_signal_csv(path, f):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# n={f.grid.n} L={f.grid.L!r}\n")
        w = csv.writer(fh)
        w.writerow(["j", "x", "re", "im"])
        for j, (x, v) in enumerate(zip(f.grid.x, f.samples)):
            w.writerow([j, repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


def read_signal_csv(path):
    with open(path, encoding="utf-8") as fh:
        meta = fh.readline()
        rows = list(csv.DictReader(fh))
    kv = dict(item.split("=") for item in meta.lstrip("# ").split())
    grid = GridSpec(int(kv["n"]), float(kv["L"]))
    vals = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    return SampledSignal(grid, vals)


# phase-space fields


def field_to_dict(fld):
    return {"n": fld.grid.n, "L": fld.grid.L, "re": fld.values.real, "im": fld.values.imag}


def field_from_dict(data):
    grid = _grid_of(data)
    vals = np.asarray(data["re"], float) + 1j * np.asarray(data["im"], float)
    return PhaseSpaceField(grid, vals)


def save_field(path, fld):
    write_json(path, field_to_dict(fld))


def load_field(path):
    return field_from_dict(read_json(path))


def write_field_csv(path, fld, magnitude_only=False):
    """Rows ``m,k,x,w,re,im`` (or ``m,k,x,w,abs`` for plot-ready magnitudes)."""
    grid = fld.grid
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# n={grid.n} L={grid.L!r}\n")
        w = csv.writer(fh)
        w.writerow(["m", "k", "x", "w", "abs"] if magnitude_only else ["m", "k", "x", "w", "re", "im"])
        for m in range(grid.n):
            for k in range(grid.n):
                v = fld.values[m, k]
                head = [m, k, repr(float(grid.x[m])), repr(float(grid.w[k]))]
                tail = [repr(float(abs(v)))] if magnitude_only else [repr(float(v.real)), repr(float(v.imag))]
                w.writerow(head + tail)


# Gabor coefficients


def coefs_to_dict(coefs):
    lat = coefs.lattice
    return {
        "n": lat.grid.n, "L": lat.grid.L, "a_step": lat.a_step, "b_step": lat.b_step,
        "re": coefs.values.real, "im": coefs.values.imag,
    }


def coefs_from_dict(data):
    from .gabor import CoefArray, Lattice

    lat = Lattice(int(data["a_step"]), int(data["b_step"]), _grid_of(data))
    return CoefArray(lat, np.asarray(data["re"], float) + 1j * np.asarray(data["im"], float))


# operators


def operator_to_dict(op):
    return {"n": op.grid.n, "L": op.grid.L, "entries_re": op.entries.real, "entries_im": op.entries.imag}


def operator_from_dict(data):
    grid = _grid_of(data)
    entries = np.asarray(data["entries_re"], float) + 1j * np.asarray(data["entries_im"], float)
    return OperatorMatrix(grid, entries)


def save_operator(path, op):
    write_json(path, operator_to_dict(op))


def load_operator(path):
    return operator_from_dict(read_json(path))


def spectrum_report(eigenvalues, overlaps, decay_fits):
    return {
        "eigenvalues": list(eigenvalues),
        "overlaps": list(overlaps),
        "decay_fits": [f.as_dict() for f in decay_fits],
    }


def output_dir(explicit=None):
    """``explicit`` if given, else ``$TFLAB_OUT``, else the working directory."""
    path = explicit or os.environ.get("TFLAB_OUT") or "."
    os.makedirs(path, exist_ok=True)
    return path
